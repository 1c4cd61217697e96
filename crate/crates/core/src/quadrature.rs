//! Composite Newton–Cotes rules on uniform grids.

/// Weights of the composite Simpson rule on `n` equally spaced points with
/// spacing `h`. An odd panel count closes with the 3/8 rule on the last three
/// panels; two points fall back to the trapezoid.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2, "need at least two quadrature points");
    let panels = n - 1;
    let mut w = vec![0.0; n];
    if panels == 1 {
        w[0] = h / 2.0;
        w[1] = h / 2.0;
        return w;
    }
    let simpson_panels = if panels % 2 == 0 { panels } else { panels - 3 };
    for i in (0..simpson_panels).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if simpson_panels < panels {
        let s = simpson_panels;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    w
}

/// Integrates uniformly spaced samples.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    simpson_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Integrates `f` over `[a, b]` with `panels` Simpson panels.
pub fn simpson_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let values: Vec<f64> = (0..=panels)
        .map(|i| {
            if i == panels {
                f(b)
            } else {
                f(a + i as f64 * h)
            }
        })
        .collect();
    simpson(&values, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_cubics() {
        let f = |x: f64| 2.0 * x * x * x - x * x + 3.0;
        // integral over [0, 2] = 8 - 8/3 + 6
        let exact = 8.0 - 8.0 / 3.0 + 6.0;
        for panels in [2, 3, 4, 5, 9, 10] {
            assert!(
                (simpson_fn(f, 0.0, 2.0, panels) - exact).abs() < 1e-12,
                "{panels}"
            );
        }
    }

    #[test]
    fn weights_sum_to_length() {
        for n in 2..40 {
            let s: f64 = simpson_weights(n, 0.1).iter().sum();
            assert!((s - 0.1 * (n - 1) as f64).abs() < 1e-13, "{n}");
        }
    }

    #[test]
    fn fourth_order() {
        let exact = 1.0 - 1.0f64.cos();
        let e1 = (simpson_fn(f64::sin, 0.0, 1.0, 16) - exact).abs();
        let e2 = (simpson_fn(f64::sin, 0.0, 1.0, 32) - exact).abs();
        assert!((e1 / e2 - 16.0).abs() < 1.0);
    }
}
