//! First-order bias of ML estimates in Cordeiro–Klein matrix form,
//! `bias = K⁻¹ A vec(K⁻¹)`, with the Weibull information matrix `K` and
//! cumulant matrix `A` for complete and type I censored data.
//!
//! `A = [A⁽¹⁾ | A⁽²⁾]` is 2×4 with `a⁽ˡ⁾ᵢⱼ = ∂κᵢⱼ/∂θₗ − ½κᵢⱼₗ`: columns 1–2
//! hold `A⁽¹⁾` (derivatives with respect to the shape) and columns 3–4 hold
//! `A⁽²⁾` (scale). `vec` stacks `K⁻¹` column by column, giving
//! `(κ¹¹, κ²¹, κ¹², κ²²)`.
//!
//! Under censoring the derivatives `∂κᵢⱼ/∂θₗ` depend on what is held fixed
//! while `θ` moves; see [`CensoredBiasForm`].

use std::f64::consts::PI;

use nalgebra::{Matrix2, SMatrix, Vector2, Vector4};

use crate::error::{domain, Error, Result};
use crate::estimators::CensoredBiasForm;
use crate::special::{inc_gamma_derivs, EULER_GAMMA, ZETA3};
use crate::weibull::WeibullParams;

pub type CumulantMatrix = SMatrix<f64, 2, 4>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Complete,
    Censored { p: f64 },
}

/// Expected information `K` and cumulant matrix `A` for a two-parameter model.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherSystem {
    pub k_matrix: Matrix2<f64>,
    pub a_matrix: CumulantMatrix,
    pub n: usize,
    pub regime: Regime,
}

impl FisherSystem {
    /// Wraps externally derived matrices. `K` must be symmetric.
    pub fn new(
        k_matrix: Matrix2<f64>,
        a_matrix: CumulantMatrix,
        n: usize,
        regime: Regime,
    ) -> Result<Self> {
        let asym = (k_matrix[(0, 1)] - k_matrix[(1, 0)]).abs();
        if asym > 1e-12 * k_matrix.abs().max() {
            return Err(domain("information matrix must be symmetric"));
        }
        Ok(Self {
            k_matrix,
            a_matrix,
            n,
            regime,
        })
    }
}

/// `K` and `A` for complete Weibull data of size `n`.
pub fn weibull_fisher_complete(params: WeibullParams, n: usize) -> FisherSystem {
    let (k, l) = (params.shape(), params.scale());
    let g = EULER_GAMMA;
    let nf = n as f64;
    let pi2 = PI * PI;

    let k_matrix = nf
        * Matrix2::new(
            (6.0 * (g - 1.0).powi(2) + pi2) / (6.0 * k * k),
            (g - 1.0) / l,
            (g - 1.0) / l,
            k * k / (l * l),
        );

    let a11 = nf * (-12.0 * ZETA3 - 3.0 * g * (2.0 * g * (g - 7.0) + pi2 + 16.0) + 7.0 * pi2 + 12.0)
        / (12.0 * k.powi(3));
    let a12 = -nf * (6.0 * g * (g - 4.0) + pi2 + 12.0) / (12.0 * k * l);
    let a22 = -nf * (g * k + k + g - 1.0) / (2.0 * l * l);
    let a13 = a12;
    let a14 = nf * (-g * k + 3.0 * k + g - 1.0) / (2.0 * l * l);
    let a24 = -nf * (k - 1.0) * k * k / (2.0 * l.powi(3));
    let a_matrix = CumulantMatrix::new(
        a11, a12, a13, a14, //
        a12, a22, a14, a24,
    );

    FisherSystem {
        k_matrix,
        a_matrix,
        n,
        regime: Regime::Complete,
    }
}

/// `K` and `A` for type I censored Weibull data of size `n` with
/// uncensored proportion `p`, in the default form.
pub fn weibull_fisher_censored(params: WeibullParams, n: usize, p: f64) -> Result<FisherSystem> {
    weibull_fisher_censored_with(params, n, p, CensoredBiasForm::default())
}

pub fn weibull_fisher_censored_with(
    params: WeibullParams,
    n: usize,
    p: f64,
    form: CensoredBiasForm,
) -> Result<FisherSystem> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("uncensored proportion must be in (0, 1), got {p}")));
    }
    let (k, l) = (params.shape(), params.scale());
    let nf = n as f64;
    let z_c = -(-p).ln_1p();
    let [_, g1, g2, g3] = inc_gamma_derivs(z_c)?;

    let k_matrix = nf
        * Matrix2::new(
            (p + 2.0 * g1 + g2) / (k * k),
            -(p + g1) / l,
            -(p + g1) / l,
            k * k * p / (l * l),
        );

    let a11 = nf * (2.0 * p + 8.0 * g1 + 7.0 * g2 + g3) / (2.0 * k.powi(3));
    let a12 = -nf * (2.0 * p + 4.0 * g1 + g2) / (2.0 * k * l);
    let a22 = nf * (g1 * (k + 1.0) - (k - 1.0) * p) / (2.0 * l * l);
    let a13 = a12;
    let a14 = nf * ((3.0 * k - 1.0) * p + g1 * (k - 1.0)) / (2.0 * l * l);
    let a24 = -nf * (k - 1.0) * k * k * p / (2.0 * l.powi(3));
    let mut a_matrix = CumulantMatrix::new(
        a11, a12, a13, a14, //
        a12, a22, a14, a24,
    );

    if form == CensoredBiasForm::FixedCensorTime {
        // (∂κᵢⱼ/∂z)(∂z/∂θₗ) with ∂z/∂k = zL/k, ∂z/∂λ = −kz/λ, where
        // L = log z and dp/dz = e^{−z}, dγⱼ/dz = Lʲ e^{−z}.
        let lz = z_c.ln();
        let w = nf * z_c * (1.0 - p);
        let m = 1.0 + lz;
        let d11 = -w * lz * m * m / k.powi(3);
        let d12 = w * lz * m / (k * l);
        let d22 = -k * w * lz / (l * l);
        let d13 = w * m * m / (k * l);
        let d14 = -k * w * m / (l * l);
        let d24 = k.powi(3) * w / l.powi(3);
        a_matrix += CumulantMatrix::new(
            d11, d12, d13, d14, //
            d12, d22, d14, d24,
        );
    }

    Ok(FisherSystem {
        k_matrix,
        a_matrix,
        n,
        regime: Regime::Censored { p },
    })
}

/// Column-major `vec` of a 2×2 matrix.
fn vec_columns(m: &Matrix2<f64>) -> Vector4<f64> {
    Vector4::new(m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)])
}

/// `K⁻¹ A vec(K⁻¹)`: the O(1/n) bias of (shape, scale).
pub fn cox_snell_bias(system: &FisherSystem) -> Result<Vector2<f64>> {
    let k = &system.k_matrix;
    let det = k.determinant();
    let scale = k[(0, 0)].abs() * k[(1, 1)].abs();
    if !(det.abs() > 1e-14 * scale) {
        return Err(Error::Singular(format!(
            "information matrix is singular (det = {det:e})"
        )));
    }
    let k_inv = k
        .try_inverse()
        .ok_or_else(|| Error::Singular("information matrix is not invertible".into()))?;
    Ok(k_inv * system.a_matrix * vec_columns(&k_inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{bias_censored_with, bias_complete};
    use crate::oracle;

    const FORMS: [CensoredBiasForm; 2] = [CensoredBiasForm::FixedCensorTime, CensoredBiasForm::Published];

    fn params(k: f64, l: f64) -> WeibullParams {
        WeibullParams::new(k, l).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn complete_inverse_information() {
        let (k, l, n) = (2.0, 3.0, 7);
        let sys = weibull_fisher_complete(params(k, l), n);
        let inv = sys.k_matrix.try_inverse().unwrap();
        let pi2 = PI * PI;
        let nf = n as f64;
        assert!(rel(inv[(0, 0)], 6.0 * k * k / (nf * pi2)) < 1e-12);
        assert!(rel(inv[(0, 1)], -6.0 * (EULER_GAMMA - 1.0) * l / (nf * pi2)) < 1e-12);
        assert!((sys.k_matrix * inv - Matrix2::identity()).abs().max() < 1e-12);
        assert!(sys.k_matrix.determinant() > 0.0);
        // det K = n² (π²/6) / λ²
        assert!(rel(sys.k_matrix.determinant(), nf * nf * pi2 / 6.0 / (l * l)) < 1e-12);
    }

    #[test]
    fn censored_information_properties() {
        let sys = weibull_fisher_censored(params(2.0, 1.0), 10, 0.5).unwrap();
        assert!(rel(sys.k_matrix[(1, 1)], 10.0 * 4.0 * 0.5) < 1e-15);
        let eig = sys.k_matrix.symmetric_eigenvalues();
        assert!(eig.iter().all(|&e| e > 0.0));
        assert_eq!(sys.k_matrix, sys.k_matrix.transpose());
        assert!(weibull_fisher_censored(params(2.0, 1.0), 10, 1.0).is_err());
    }

    #[test]
    fn censored_matrices_converge_to_complete() {
        let (p_, n) = (params(3.0, 0.7), 12);
        let full = weibull_fisher_complete(p_, n);
        let scale = full.a_matrix.abs().max();
        for form in FORMS {
            let near = weibull_fisher_censored_with(p_, n, 1.0 - 1e-10, form).unwrap();
            assert!((full.a_matrix - near.a_matrix).abs().max() < 1e-6 * scale);
            assert!((full.k_matrix - near.k_matrix).abs().max() < 1e-6 * full.k_matrix.abs().max());
        }
        for form in FORMS {
            let unit = params(1.0, 1.0);
            let full = weibull_fisher_complete(unit, 1);
            let near = weibull_fisher_censored_with(unit, 1, 1.0 - 1e-10, form).unwrap();
            assert!((full.a_matrix - near.a_matrix).abs().max() < 1e-6);
        }
    }

    /// First, second and third derivatives of one observation's
    /// log-likelihood in `(k, λ)`; `y` is the censoring time when `!event`.
    type Derivs = ([f64; 2], [[f64; 2]; 2], [[[f64; 2]; 2]; 2]);

    fn loglik_derivs(k: f64, l: f64, y: f64, event: bool) -> Derivs {
        let s = (y / l).ln();
        let u = (k * s).exp();
        let mut d1 = [-u * s, k * u / l];
        let mut d2 = [
            [-u * s * s, (u + k * u * s) / l],
            [(u + k * u * s) / l, -k * (k + 1.0) * u / (l * l)],
        ];
        let kkl = (k * u * s * s + 2.0 * u * s) / l;
        let kll = (-u - 2.0 * k * u - k * u * s - k * k * u * s) / (l * l);
        let mut d3 = [
            [[-u * s.powi(3), kkl], [kkl, kll]],
            [[kkl, kll], [kll, k * (k + 1.0) * (k + 2.0) * u / l.powi(3)]],
        ];
        if event {
            d1[0] += 1.0 / k + s;
            d1[1] -= k / l;
            d2[0][0] -= 1.0 / (k * k);
            d2[0][1] -= 1.0 / l;
            d2[1][0] -= 1.0 / l;
            d2[1][1] += k / (l * l);
            d3[0][0][0] += 2.0 / k.powi(3);
            for (i, j, m) in [(0, 1, 1), (1, 0, 1), (1, 1, 0)] {
                d3[i][j][m] += 1.0 / (l * l);
            }
            d3[1][1][1] -= 2.0 * k / l.powi(3);
        }
        (d1, d2, d3)
    }

    /// Per-observation `K` and `A = ½κᵢⱼₗ + κᵢⱼ,ₗ` by quadrature over the
    /// uncensored part plus the point mass at `c`.
    fn first_principles(th: WeibullParams, c: f64) -> (Matrix2<f64>, CumulantMatrix) {
        let (k, l) = (th.shape(), th.scale());
        let expect = |g: &dyn Fn(f64, bool) -> f64| {
            let body = oracle::tanh_sinh(|y| th.pdf(y).unwrap() * g(y, true), 0.0, c, 1e-12);
            body + th.survival(c) * g(c, false)
        };
        let mut km = Matrix2::zeros();
        let mut am = CumulantMatrix::zeros();
        for i in 0..2 {
            for j in 0..2 {
                km[(i, j)] = -expect(&|y, e| loglik_derivs(k, l, y, e).1[i][j]);
                for m in 0..2 {
                    am[(i, 2 * m + j)] = expect(&|y, e| {
                        let (d1, d2, d3) = loglik_derivs(k, l, y, e);
                        0.5 * d3[i][j][m] + d2[i][j] * d1[m]
                    });
                }
            }
        }
        (km, am)
    }

    #[test]
    fn censored_matrices_match_first_principles() {
        for (k, l, p) in [(1.0, 1.0, 0.5), (0.8, 2.0, 0.3), (2.5, 0.7, 0.7), (4.0, 1.3, 0.9)] {
            let th = params(k, l);
            let c = th.censor_threshold_for_p(p).unwrap();
            let (km, am) = first_principles(th, c);
            let sys = weibull_fisher_censored(th, 1, p).unwrap();
            let scale = am.abs().max();
            assert!((sys.k_matrix - km).abs().max() < 1e-8 * km.abs().max());
            assert!((sys.a_matrix - am).abs().max() < 1e-8 * scale, "{}\n{}", sys.a_matrix, am);
            let published = weibull_fisher_censored_with(th, 1, p, CensoredBiasForm::Published).unwrap();
            assert!((published.a_matrix - am).abs().max() > 1e-3 * scale);
        }
    }

    #[test]
    fn matrix_form_matches_closed_forms() {
        for k in [0.5, 1.0, 5.0, 10.0] {
            for l in [0.5, 1.0, 2.0] {
                for n in [5, 20, 100] {
                    let th = params(k, l);
                    let b = cox_snell_bias(&weibull_fisher_complete(th, n)).unwrap();
                    let c = bias_complete(th, n).unwrap();
                    assert!(rel(b[0], c.bias_k) < 1e-9);
                    assert!(rel(b[1], c.bias_lambda) < 1e-9);
                    for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
                        for form in FORMS {
                            let sys = weibull_fisher_censored_with(th, n, p, form).unwrap();
                            let b = cox_snell_bias(&sys).unwrap();
                            let c = bias_censored_with(th, n, p, form).unwrap();
                            assert!(rel(b[0], c.bias_k) < 1e-9, "k={k} l={l} n={n} p={p} {form}");
                            assert!(rel(b[1], c.bias_lambda) < 1e-9, "k={k} l={l} n={n} p={p} {form}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bias_scales_inversely_with_n() {
        let th = params(1.7, 2.2);
        let base = cox_snell_bias(&weibull_fisher_censored(th, 1, 0.4).unwrap()).unwrap();
        for n in [2, 10, 1000] {
            let b = cox_snell_bias(&weibull_fisher_censored(th, n, 0.4).unwrap()).unwrap();
            assert!(rel(b[0] * n as f64, base[0]) < 1e-12);
            assert!(rel(b[1] * n as f64, base[1]) < 1e-12);
        }
    }

    #[test]
    fn swapping_block_and_row_indices_breaks_agreement() {
        // Alternate convention: the block index l as the row and (i, j) as the column.
        let th = params(2.0, 1.5);
        let sys = weibull_fisher_complete(th, 10);
        let a = &sys.a_matrix;
        let mut alt = CumulantMatrix::zeros();
        for l in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    alt[(l, 2 * i + j)] = a[(i, 2 * l + j)];
                }
            }
        }
        let alt_sys = FisherSystem::new(sys.k_matrix, alt, sys.n, sys.regime).unwrap();
        let wrong = cox_snell_bias(&alt_sys).unwrap();
        let right = bias_complete(th, 10).unwrap();
        assert!(rel(wrong[0], right.bias_k) > 1e-3);
    }

    #[test]
    fn singular_information_is_reported() {
        let sys = FisherSystem::new(
            Matrix2::new(1.0, 2.0, 2.0, 4.0),
            CumulantMatrix::zeros(),
            1,
            Regime::Complete,
        )
        .unwrap();
        assert!(matches!(cox_snell_bias(&sys), Err(Error::Singular(_))));
        assert!(FisherSystem::new(
            Matrix2::new(1.0, 2.0, 3.0, 4.0),
            CumulantMatrix::zeros(),
            1,
            Regime::Complete
        )
        .is_err());
    }
}
