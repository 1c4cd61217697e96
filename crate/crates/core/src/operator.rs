//! Spectra of the transverse operator.
//!
//! Everything downstream depends on the transverse operator only through its
//! eigenvalues `mu_k`, so an [`OperatorSpectrum`] is just a validated list of
//! them. Two built-in instances are provided (the Dirichlet Laplacian on
//! `(0, pi)` and on the cube `(0, pi)^dim`); anything else is read from a
//! spectrum file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const DIRICHLET_1D: &str = "dirichlet-1d";
pub const EXTERNAL: &str = "external";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub k: usize,
    pub mu: f64,
    /// Multi-index generating `mu` for tensor spectra.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<Vec<u32>>,
}

/// Validated eigenvalue sequence: indices `1..=n`, every `mu >= 1`,
/// nondecreasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSpectrum {
    entries: Vec<SpectrumEntry>,
    domain_descriptor: String,
}

impl OperatorSpectrum {
    pub fn from_entries(
        entries: Vec<SpectrumEntry>,
        domain_descriptor: impl Into<String>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("spectrum has no entries".into()));
        }
        let mut previous = f64::NEG_INFINITY;
        for (i, e) in entries.iter().enumerate() {
            if e.k != i + 1 {
                return Err(Error::InvalidArgument(format!(
                    "spectrum indices must be consecutive from 1; found k = {} at position {}",
                    e.k,
                    i + 1
                )));
            }
            if !(e.mu >= 1.0) || !e.mu.is_finite() {
                return Err(Error::FriedrichsViolation { k: e.k, mu: e.mu });
            }
            if e.mu < previous {
                return Err(Error::Ordering {
                    k: e.k,
                    mu: e.mu,
                    previous,
                });
            }
            previous = e.mu;
        }
        Ok(Self {
            entries,
            domain_descriptor: domain_descriptor.into(),
        })
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn domain_descriptor(&self) -> &str {
        &self.domain_descriptor
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Eigenvalue with 1-based index `k`.
    pub fn mu(&self, k: usize) -> Option<f64> {
        k.checked_sub(1)
            .and_then(|i| self.entries.get(i))
            .map(|e| e.mu)
    }

    pub fn mus(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mu).collect()
    }

    /// Only the built-in 1-D Dirichlet basis can be evaluated in space.
    pub fn has_evaluable_basis(&self) -> bool {
        self.domain_descriptor == DIRICHLET_1D
    }

    /// First `k_max` entries, keeping the descriptor.
    pub fn truncated(&self, k_max: usize) -> Result<Self> {
        if k_max == 0 || k_max > self.len() {
            return Err(Error::InvalidArgument(format!(
                "truncation {k_max} outside 1..={}",
                self.len()
            )));
        }
        Ok(Self {
            entries: self.entries[..k_max].to_vec(),
            domain_descriptor: self.domain_descriptor.clone(),
        })
    }

    /// Serializes in the spectrum file format understood by [`parse_spectrum`].
    pub fn to_file_string(&self) -> String {
        let mut out = format!("# domain: {}\n", self.domain_descriptor);
        for e in &self.entries {
            let _ = write!(out, "{},{:.16e}", e.k, e.mu);
            if let Some(label) = &e.label {
                let joined: Vec<String> = label.iter().map(|i| i.to_string()).collect();
                let _ = write!(out, ",{}", joined.join(":"));
            }
            out.push('\n');
        }
        out
    }
}

/// `mu_k = k^2` for `-d^2/dx^2` on `(0, pi)` with Dirichlet ends.
pub fn dirichlet_spectrum_1d(k_max: usize) -> Result<OperatorSpectrum> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let entries = (1..=k_max)
        .map(|k| SpectrumEntry {
            k,
            mu: (k * k) as f64,
            label: None,
        })
        .collect();
    OperatorSpectrum::from_entries(entries, DIRICHLET_1D)
}

/// Dirichlet Laplacian on `(0, pi)^dim`: `mu = |k|^2` over multi-indices in
/// `[1, k_max_per_dim]^dim`, sorted by `mu` with lexicographic tie-breaking,
/// truncated to `count` entries.
pub fn tensor_spectrum(dim: usize, k_max_per_dim: usize, count: usize) -> Result<OperatorSpectrum> {
    if dim == 0 || k_max_per_dim == 0 || count == 0 {
        return Err(Error::InvalidArgument(
            "dim, k_max_per_dim and count must be positive".into(),
        ));
    }
    let box_size = u32::try_from(dim)
        .ok()
        .and_then(|d| k_max_per_dim.checked_pow(d))
        .ok_or_else(|| Error::InvalidArgument("enumeration box is too large".into()))?;
    if count > box_size {
        return Err(Error::InvalidArgument(format!(
            "count {count} exceeds the {box_size} multi-indices in the enumeration box"
        )));
    }
    if dim == 1 {
        return dirichlet_spectrum_1d(count);
    }

    // Decoding 0..box_size in base k_max (first digit most significant)
    // enumerates multi-indices lexicographically; the stable sort keeps that
    // order among ties.
    let mut indices: Vec<(u64, Vec<u32>)> = (0..box_size)
        .map(|mut n| {
            let mut label = vec![0u32; dim];
            for slot in label.iter_mut().rev() {
                *slot = (n % k_max_per_dim) as u32 + 1;
                n /= k_max_per_dim;
            }
            let norm_sq = label.iter().map(|&i| u64::from(i) * u64::from(i)).sum();
            (norm_sq, label)
        })
        .collect();
    indices.sort_by_key(|(norm_sq, _)| *norm_sq);

    let entries = indices
        .into_iter()
        .take(count)
        .enumerate()
        .map(|(i, (norm_sq, label))| SpectrumEntry {
            k: i + 1,
            mu: norm_sq as f64,
            label: Some(label),
        })
        .collect();
    OperatorSpectrum::from_entries(entries, format!("dirichlet-tensor-{dim}d"))
}

/// Parses the `k,mu[,label]` text format. `origin` is only used in error
/// messages.
pub fn parse_spectrum(text: &str, origin: &Path) -> Result<OperatorSpectrum> {
    let format_err = |line: usize, message: String| Error::Format {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(format_err(
                line_no,
                format!("expected `k,mu[,label]`, got `{line}`"),
            ));
        }
        let k: usize = fields[0]
            .parse()
            .map_err(|_| format_err(line_no, format!("bad index `{}`", fields[0])))?;
        let mu: f64 = fields[1]
            .parse()
            .map_err(|_| format_err(line_no, format!("bad eigenvalue `{}`", fields[1])))?;
        if !mu.is_finite() {
            return Err(format_err(
                line_no,
                format!("eigenvalue `{}` is not finite", fields[1]),
            ));
        }
        let label = match fields.get(2) {
            Some(l) if !l.is_empty() => Some(
                l.split(|c: char| c == ':' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<u32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| format_err(line_no, format!("bad label `{l}`")))?,
            ),
            _ => None,
        };
        if k != entries.len() + 1 {
            return Err(format_err(
                line_no,
                format!("index {k} out of sequence (expected {})", entries.len() + 1),
            ));
        }
        entries.push(SpectrumEntry { k, mu, label });
    }
    if entries.is_empty() {
        return Err(format_err(0, "no spectrum entries".into()));
    }
    OperatorSpectrum::from_entries(entries, EXTERNAL)
}

pub fn load_spectrum(path: impl AsRef<Path>) -> Result<OperatorSpectrum> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_spectrum(&text, path)
}

/// `u_k(x) = sqrt(2/pi) sin(kx)` on `[0, pi]`.
pub fn eval_basis_1d(k: usize, x: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("basis index starts at 1".into()));
    }
    if !(0.0..=std::f64::consts::PI).contains(&x) {
        return Err(Error::InvalidArgument(format!("x = {x} outside [0, pi]")));
    }
    Ok(basis_1d(k, x))
}

#[inline]
pub(crate) fn basis_1d(k: usize, x: f64) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() * (k as f64 * x).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson;
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_squares() {
        let s = dirichlet_spectrum_1d(3).unwrap();
        assert_eq!(s.mus(), vec![1.0, 4.0, 9.0]);
        assert_eq!(dirichlet_spectrum_1d(1).unwrap().mus(), vec![1.0]);
        let s10 = dirichlet_spectrum_1d(10).unwrap();
        assert_eq!(s10.mu(10), Some(100.0));
        assert_eq!(s10.mu(10).unwrap().sqrt(), 10.0);
        assert!(matches!(
            dirichlet_spectrum_1d(0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn tensor_examples() {
        let s = tensor_spectrum(2, 4, 3).unwrap();
        assert_eq!(s.mus(), vec![2.0, 5.0, 5.0]);
        let labels: Vec<_> = s
            .entries()
            .iter()
            .map(|e| e.label.clone().unwrap())
            .collect();
        assert_eq!(labels, vec![vec![1, 1], vec![1, 2], vec![2, 1]]);
        assert_eq!(s.domain_descriptor(), "dirichlet-tensor-2d");

        assert_eq!(
            tensor_spectrum(1, 10, 4).unwrap(),
            dirichlet_spectrum_1d(4).unwrap()
        );

        let s3 = tensor_spectrum(3, 2, 1).unwrap();
        assert_eq!(s3.mus(), vec![3.0]);
        assert_eq!(s3.entries()[0].label, Some(vec![1, 1, 1]));

        assert!(matches!(
            tensor_spectrum(2, 2, 5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn tensor_is_monotone() {
        for dim in 1..=4 {
            for count in [1, 2, 4, 7, 16]
                .into_iter()
                .filter(|&c| c <= 5usize.pow(dim as u32))
            {
                let s = tensor_spectrum(dim, 5, count).unwrap();
                assert!(
                    s.mus().windows(2).all(|w| w[0] <= w[1]),
                    "dim {dim} count {count}"
                );
                assert_eq!(s.len(), count);
            }
        }
    }

    #[test]
    fn parse_errors() {
        let p = Path::new("mem");
        let ok = parse_spectrum("# comment\n1,1.0\n2,4.0\n", p).unwrap();
        assert_eq!(ok.mus(), vec![1.0, 4.0]);
        assert_eq!(ok.domain_descriptor(), EXTERNAL);
        assert!(matches!(
            parse_spectrum("1,0.5\n", p),
            Err(Error::FriedrichsViolation { k: 1, .. })
        ));
        assert!(matches!(
            parse_spectrum("1,4.0\n2,1.0\n", p),
            Err(Error::Ordering { k: 2, .. })
        ));
        assert!(matches!(
            parse_spectrum("1;4.0\n", p),
            Err(Error::Format { line: 1, .. })
        ));
        assert!(matches!(
            parse_spectrum("1,abc\n", p),
            Err(Error::Format { .. })
        ));
        assert!(matches!(
            parse_spectrum("2,4.0\n", p),
            Err(Error::Format { .. })
        ));
        assert!(matches!(parse_spectrum("", p), Err(Error::Format { .. })));
    }

    #[test]
    fn file_format_roundtrip() {
        let s = tensor_spectrum(2, 5, 8).unwrap();
        let back = parse_spectrum(&s.to_file_string(), Path::new("mem")).unwrap();
        assert_eq!(back.mus(), s.mus());
        assert_eq!(back.entries()[3].label, s.entries()[3].label);
    }

    #[test]
    fn basis_values() {
        let c = (2.0 / PI).sqrt();
        assert!((eval_basis_1d(1, PI / 2.0).unwrap() - 0.7978845608028654).abs() < 1e-15);
        assert!(eval_basis_1d(2, PI / 2.0).unwrap().abs() < 1e-15);
        assert!((eval_basis_1d(3, PI / 6.0).unwrap() - c).abs() < 1e-15);
        assert!(eval_basis_1d(1, -0.1).is_err());
        assert!(eval_basis_1d(1, 3.2).is_err());
    }

    #[test]
    fn basis_orthonormal() {
        let panels = 512;
        let h = PI / panels as f64;
        for j in 1..=20 {
            for k in j..=20 {
                let vals: Vec<f64> = (0..=panels)
                    .map(|i| {
                        let x = (i as f64 * h).min(PI);
                        basis_1d(j, x) * basis_1d(k, x)
                    })
                    .collect();
                let g = simpson(&vals, h);
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-10, "({j},{k}) -> {g}");
            }
        }
    }
}
