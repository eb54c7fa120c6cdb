//! Linear least squares for power-law series `Σ c_j k^{p_j}`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeastSquaresFit {
    /// One coefficient per exponent, in the order given.
    pub coefficients: Vec<f64>,
    pub exponents: Vec<f64>,
    /// sqrt(mean squared residual).
    pub rms_residual: f64,
}

impl LeastSquaresFit {
    pub fn predict(&self, k: f64) -> f64 {
        self.coefficients
            .iter()
            .zip(&self.exponents)
            .map(|(c, p)| c * k.powf(*p))
            .sum()
    }
}

/// Fit `value ≈ Σ c_j k^{p_j}` by Householder QR on the column-equilibrated
/// design matrix.
pub fn least_squares_fit(samples: &[(f64, f64)], exponents: &[f64]) -> Result<LeastSquaresFit> {
    let m = samples.len();
    let n = exponents.len();
    if m < n || n == 0 {
        return Err(Error::Underdetermined {
            samples: m,
            unknowns: n,
        });
    }
    for (i, a) in samples.iter().enumerate() {
        if samples[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::DuplicateSample(a.0));
        }
    }

    let mut a: Vec<Vec<f64>> = samples
        .iter()
        .map(|&(k, _)| exponents.iter().map(|&p| k.powf(p)).collect())
        .collect();
    let mut b: Vec<f64> = samples.iter().map(|&(_, v)| v).collect();

    let scales: Vec<f64> = (0..n)
        .map(|j| {
            let s = a.iter().map(|row| row[j] * row[j]).sum::<f64>().sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    for row in &mut a {
        for (x, s) in row.iter_mut().zip(&scales) {
            *x /= s;
        }
    }

    for j in 0..n {
        let norm = (j..m).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Underdetermined {
                samples: m,
                unknowns: n,
            });
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..m).map(|i| a[i][j]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for c in j..n {
            let dot: f64 = (j..m).map(|i| v[i - j] * a[i][c]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in j..m {
                a[i][c] -= f * v[i - j];
            }
        }
        let dot: f64 = (j..m).map(|i| v[i - j] * b[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in j..m {
            b[i] -= f * v[i - j];
        }
    }

    let mut x = vec![0.0; n];
    for j in (0..n).rev() {
        let mut s = b[j];
        for c in (j + 1)..n {
            s -= a[j][c] * x[c];
        }
        if a[j][j].abs() < 1e-300 {
            return Err(Error::Underdetermined {
                samples: m,
                unknowns: n,
            });
        }
        x[j] = s / a[j][j];
    }
    let coefficients: Vec<f64> = x.iter().zip(&scales).map(|(c, s)| c / s).collect();

    let fit = LeastSquaresFit {
        coefficients,
        exponents: exponents.to_vec(),
        rms_residual: 0.0,
    };
    let ss: f64 = samples
        .iter()
        .map(|&(k, v)| {
            let r = v - fit.predict(k);
            r * r
        })
        .sum();
    Ok(LeastSquaresFit {
        rms_residual: (ss / m as f64).sqrt(),
        ..fit
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_linear() {
        let s: Vec<(f64, f64)> = [4.0, 8.0, 16.0].iter().map(|&k| (k, 2.0 * k + 3.0)).collect();
        let f = least_squares_fit(&s, &[1.0, 0.0]).unwrap();
        assert!((f.coefficients[0] - 2.0).abs() < 1e-13);
        assert!((f.coefficients[1] - 3.0).abs() < 1e-12);
        assert!(f.rms_residual < 1e-12);
    }

    #[test]
    fn unmodelled_tail() {
        let s: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0].iter().map(|&k| (k, k + 1.0 / k)).collect();
        let f = least_squares_fit(&s, &[1.0, 0.0]).unwrap();
        assert!((f.coefficients[0] - 1.0).abs() < 0.01);
        assert!(f.coefficients[1].abs() <= 0.2);
    }

    #[test]
    fn single_sample_interpolates() {
        let f = least_squares_fit(&[(5.0, 10.0)], &[1.0]).unwrap();
        assert!((f.coefficients[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            least_squares_fit(&[(1.0, 1.0)], &[1.0, 0.0]),
            Err(Error::Underdetermined { .. })
        ));
        assert!(matches!(
            least_squares_fit(&[(2.0, 1.0), (2.0, 3.0)], &[0.0]),
            Err(Error::DuplicateSample(_))
        ));
    }
}
