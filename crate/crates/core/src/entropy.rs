//! Matrix-based Renyi entropy.
//!
//! For a trace-one PSD matrix `A` with eigenvalues `lambda_i`,
//! `S_a(A) = log2(sum_i lambda_i^a) / (1 - a)`, measured in bits. Joint entropy
//! uses the trace-normalized Hadamard product of two Gram matrices and the
//! conditional entropy is the joint minus the marginal of the conditioning
//! variable.
//!
//! Gradients with respect to the matrix argument are
//! `a / ((1 - a) ln2 tr(A^a)) * U Lambda^(a-1) U^T`.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::gram::{hadamard_joint, scaled_hadamard, NormalizedGram};
use crate::linalg::{self, EigenDecomposition};

/// Eigenvalues below this are treated as a non-PSD input rather than round-off.
pub const PSD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropySpec {
    pub alpha: f64,
    /// Lower clamp applied to eigenvalues before raising them to `alpha - 1`.
    pub eig_floor: f64,
}

impl EntropySpec {
    pub const DEFAULT_ALPHA: f64 = 1.01;
    pub const DEFAULT_EIG_FLOOR: f64 = 1e-12;

    pub fn new(alpha: f64, eig_floor: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || alpha == 1.0 {
            return Err(Error::usage(format!(
                "entropy order alpha must be positive and != 1, got {alpha}"
            )));
        }
        if !(eig_floor >= 0.0 && eig_floor.is_finite()) {
            return Err(Error::usage(format!("eig_floor must be >= 0, got {eig_floor}")));
        }
        Ok(Self { alpha, eig_floor })
    }

    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, Self::DEFAULT_EIG_FLOOR)
    }
}

impl Default for EntropySpec {
    fn default() -> Self {
        Self {
            alpha: Self::DEFAULT_ALPHA,
            eig_floor: Self::DEFAULT_EIG_FLOOR,
        }
    }
}

fn check_psd(eigenvalues: &[f64]) -> Result<()> {
    match eigenvalues.iter().copied().reduce(f64::min) {
        Some(min) if min < -PSD_TOLERANCE => Err(Error::Numerical(format!(
            "matrix is not positive semidefinite: eigenvalue {min:e} < -{PSD_TOLERANCE:e}"
        ))),
        Some(min) if min.is_nan() => Err(Error::Numerical("eigenvalue is NaN".into())),
        _ => Ok(()),
    }
}

/// `sum_i lambda_i^alpha` with eigenvalues capped at one. Eigenvalues below
/// the numerical rank cutoff `N eps lambda_max` are round-off and count as
/// zero; for `alpha < 1` they would otherwise add visible mass.
fn power_trace(eigenvalues: &[f64], alpha: f64) -> f64 {
    let max = eigenvalues.iter().copied().fold(0.0, f64::max);
    let cutoff = eigenvalues.len() as f64 * f64::EPSILON * max;
    eigenvalues
        .iter()
        .filter(|&&l| l > cutoff)
        .map(|&l| l.min(1.0).powf(alpha))
        .sum()
}

fn entropy_from_power_trace(tr: f64, n: usize, alpha: f64) -> f64 {
    // Round-off can push the value a hair outside [0, log2 N].
    let s = tr.log2() / (1.0 - alpha);
    s.clamp(0.0, (n as f64).log2())
}

/// Renyi entropy in bits of a trace-one PSD matrix.
pub fn renyi_entropy(a: MatRef<'_, f64>, spec: EntropySpec) -> Result<f64> {
    let vals = linalg::symmetric_eigenvalues(a)?;
    check_psd(&vals)?;
    let tr = power_trace(&vals, spec.alpha);
    if !(tr > 0.0) {
        return Err(Error::Numerical(format!("tr(A^alpha) = {tr} is not positive")));
    }
    Ok(entropy_from_power_trace(tr, vals.len(), spec.alpha))
}

pub fn joint_entropy(a: &NormalizedGram, b: &NormalizedGram, spec: EntropySpec) -> Result<f64> {
    renyi_entropy(hadamard_joint(a, b)?.as_ref(), spec)
}

/// `S(A|B) = S(A, B) - S(B)`.
pub fn conditional_entropy(
    a: &NormalizedGram,
    b: &NormalizedGram,
    spec: EntropySpec,
) -> Result<f64> {
    Ok(joint_entropy(a, b, spec)? - renyi_entropy(b.as_ref(), spec)?)
}

/// Entropy value and `U Lambda^(a-1) U^T` scaled by `a / ((1-a) ln2 tr(A^a))`.
pub(crate) fn entropy_and_gradient(
    m: MatRef<'_, f64>,
    spec: EntropySpec,
) -> Result<(f64, Mat<f64>)> {
    let evd = EigenDecomposition::new(m)?;
    check_psd(&evd.eigenvalues)?;
    let alpha = spec.alpha;
    if alpha < 1.0
        && spec.eig_floor == 0.0
        && evd.eigenvalues.iter().any(|&l| l <= 0.0)
    {
        return Err(Error::Numerical(
            "zero eigenvalue raised to a negative power; set eig_floor > 0 when alpha < 1".into(),
        ));
    }
    let tr = power_trace(&evd.eigenvalues, alpha);
    if !(tr > 0.0) {
        return Err(Error::Numerical(format!("tr(A^alpha) = {tr} is not positive")));
    }
    let value = entropy_from_power_trace(tr, evd.eigenvalues.len(), alpha);
    let coef = alpha / ((1.0 - alpha) * std::f64::consts::LN_2 * tr);
    let floor = spec.eig_floor;
    let grad = evd.spectral_map(|l| coef * l.clamp(floor, 1.0).powf(alpha - 1.0));
    Ok((value, grad))
}

/// Gradient of `S_a(B)` with respect to the entries of `B`.
pub fn marginal_entropy_gradient(b: MatRef<'_, f64>, spec: EntropySpec) -> Result<Mat<f64>> {
    Ok(entropy_and_gradient(b, spec)?.1)
}

/// Value of `S_a(N A_x o B)` and its gradient with respect to `B`.
pub(crate) fn joint_entropy_and_gradient(
    a_x: MatRef<'_, f64>,
    b: MatRef<'_, f64>,
    spec: EntropySpec,
) -> Result<(f64, Mat<f64>)> {
    let joint = scaled_hadamard(a_x, b)?;
    let (value, inner) = entropy_and_gradient(joint.as_ref(), spec)?;
    // inner already carries the scalar coefficient; chain through N A_x o (.)
    let n = a_x.nrows() as f64;
    let grad = Mat::from_fn(b.nrows(), b.ncols(), |i, j| {
        n * a_x.read(i, j) * inner.read(i, j)
    });
    Ok((value, grad))
}

/// Gradient of `S_a(N A_x o B)` with respect to the entries of `B`.
pub fn joint_entropy_gradient(
    a_x: MatRef<'_, f64>,
    b: MatRef<'_, f64>,
    spec: EntropySpec,
) -> Result<Mat<f64>> {
    Ok(joint_entropy_and_gradient(a_x, b, spec)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::normalized_gram;
    use crate::linalg::from_rows;
    use crate::rng::RandomStream;
    use proptest::prelude::*;

    fn scaled_identity(n: usize) -> Mat<f64> {
        Mat::from_fn(n, n, |i, j| if i == j { 1.0 / n as f64 } else { 0.0 })
    }

    fn random_gram(rng: &mut RandomStream, n: usize, d: usize, sigma: f64) -> NormalizedGram {
        let x = Mat::from_fn(n, d, |_, _| rng.normal());
        normalized_gram(x.as_ref(), sigma).unwrap()
    }

    fn random_symmetric_trace_zero(rng: &mut RandomStream, n: usize) -> Mat<f64> {
        let raw = Mat::from_fn(n, n, |_, _| rng.normal());
        let mut e = Mat::from_fn(n, n, |i, j| 0.5 * (raw.read(i, j) + raw.read(j, i)));
        let shift = linalg::trace(e.as_ref()) / n as f64;
        for i in 0..n {
            e.write(i, i, e.read(i, i) - shift);
        }
        e
    }

    fn inner(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                acc += a.read(i, j) * b.read(i, j);
            }
        }
        acc
    }

    fn axpy(m: MatRef<'_, f64>, h: f64, e: MatRef<'_, f64>) -> Mat<f64> {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m.read(i, j) + h * e.read(i, j))
    }

    #[test]
    fn spec_validation() {
        assert!(EntropySpec::new(1.0, 0.0).is_err());
        assert!(EntropySpec::new(0.0, 0.0).is_err());
        assert!(EntropySpec::new(2.0, -1.0).is_err());
        assert_eq!(EntropySpec::default().alpha, 1.01);
    }

    #[test]
    fn scaled_identity_has_log_n_bits() {
        let spec = EntropySpec::with_alpha(2.0).unwrap();
        let s = renyi_entropy(scaled_identity(4).as_ref(), spec).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_has_zero_entropy() {
        for alpha in [0.5, 1.01, 2.0, 3.0] {
            let spec = EntropySpec::with_alpha(alpha).unwrap();
            let m = Mat::from_fn(5, 5, |_, _| 0.2);
            let s = renyi_entropy(m.as_ref(), spec).unwrap();
            assert!(s.abs() < 1e-12, "alpha={alpha}: {s}");
        }
    }

    #[test]
    fn two_by_two_hand_case() {
        let m = from_rows(&[vec![0.5, 0.3], vec![0.3, 0.5]]).unwrap();
        let spec = EntropySpec::with_alpha(2.0).unwrap();
        let s = renyi_entropy(m.as_ref(), spec).unwrap();
        // eigenvalues 0.8 and 0.2
        let want = -(0.8f64 * 0.8 + 0.2 * 0.2).log2();
        assert!((s - want).abs() < 1e-12);
        assert!((s - 0.556393).abs() < 1e-6);
    }

    #[test]
    fn non_psd_is_reported() {
        let m = from_rows(&[vec![0.5, 0.9], vec![0.9, 0.5]]).unwrap();
        let err = renyi_entropy(m.as_ref(), EntropySpec::default()).unwrap_err();
        match err {
            Error::Numerical(msg) => assert!(msg.contains("eigenvalue -3.99"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn joint_and_conditional_special_cases() {
        let mut rng = RandomStream::new(3, 0);
        let spec = EntropySpec::default();
        let a = random_gram(&mut rng, 10, 2, 0.6);
        let constant = normalized_gram(Mat::<f64>::zeros(10, 2).as_ref(), 0.6).unwrap();
        let sa = renyi_entropy(a.as_ref(), spec).unwrap();
        let j = joint_entropy(&a, &constant, spec).unwrap();
        assert!((j - sa).abs() < 1e-10);
        assert!(conditional_entropy(&constant, &a, spec).unwrap().abs() < 1e-10);
        assert!((conditional_entropy(&a, &constant, spec).unwrap() - sa).abs() < 1e-10);
        let self_joint = joint_entropy(&a, &a, spec).unwrap();
        assert!(self_joint >= sa - 1e-9);
        let cond_self = conditional_entropy(&a, &a, spec).unwrap();
        assert!(cond_self >= -1e-9 && cond_self <= sa + 1e-9);
    }

    #[test]
    fn conditional_is_joint_minus_marginal() {
        let mut rng = RandomStream::new(11, 0);
        let spec = EntropySpec::with_alpha(2.0).unwrap();
        for _ in 0..10 {
            let a = random_gram(&mut rng, 12, 3, 1.0);
            let b = random_gram(&mut rng, 12, 2, 0.8);
            let joint = hadamard_joint(&a, &b).unwrap();
            let direct = renyi_entropy(joint.as_ref(), spec).unwrap()
                - renyi_entropy(b.as_ref(), spec).unwrap();
            let c = conditional_entropy(&a, &b, spec).unwrap();
            assert!((c - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_gradient_of_scaled_identity() {
        let spec = EntropySpec::with_alpha(2.0).unwrap();
        let n = 5;
        let g = marginal_entropy_gradient(scaled_identity(n).as_ref(), spec).unwrap();
        let want = -2.0 / std::f64::consts::LN_2;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { want } else { 0.0 };
                assert!((g.read(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradients_are_exactly_symmetric() {
        let mut rng = RandomStream::new(5, 0);
        let spec = EntropySpec::default();
        let a = random_gram(&mut rng, 9, 2, 0.7);
        let b = random_gram(&mut rng, 9, 2, 0.4);
        for g in [
            marginal_entropy_gradient(b.as_ref(), spec).unwrap(),
            joint_entropy_gradient(a.as_ref(), b.as_ref(), spec).unwrap(),
        ] {
            for i in 0..9 {
                for j in 0..9 {
                    assert_eq!(g.read(i, j), g.read(j, i));
                }
            }
        }
    }

    #[test]
    fn joint_gradient_with_constant_input_reduces_to_marginal() {
        let mut rng = RandomStream::new(8, 0);
        let spec = EntropySpec::default();
        let b = random_gram(&mut rng, 7, 2, 0.9);
        let constant = normalized_gram(Mat::<f64>::zeros(7, 1).as_ref(), 1.0).unwrap();
        let gj = joint_entropy_gradient(constant.as_ref(), b.as_ref(), spec).unwrap();
        let gm = marginal_entropy_gradient(b.as_ref(), spec).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                assert!((gj.read(i, j) - gm.read(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn alpha_below_one_with_zero_floor_rejects_singular() {
        let spec = EntropySpec::new(0.5, 0.0).unwrap();
        let m = Mat::from_fn(3, 3, |_, _| 1.0 / 3.0);
        assert!(matches!(
            marginal_entropy_gradient(m.as_ref(), spec),
            Err(Error::Numerical(_))
        ));
        // a positive floor keeps it finite
        let spec = EntropySpec::new(0.5, 1e-12).unwrap();
        assert!(marginal_entropy_gradient(m.as_ref(), spec).is_ok());
    }

    // Finite-difference oracle: S(B + hE) - S(B - hE) over 2h against <grad, E>.
    fn directional_check(alpha: f64, seed: u64, joint: bool) {
        let spec = EntropySpec::with_alpha(alpha).unwrap();
        let mut rng = RandomStream::new(seed, 0);
        let n = 8;
        let a = random_gram(&mut rng, n, 2, 1.0);
        let b = random_gram(&mut rng, n, 2, 1.2);
        let grad = if joint {
            joint_entropy_gradient(a.as_ref(), b.as_ref(), spec).unwrap()
        } else {
            marginal_entropy_gradient(b.as_ref(), spec).unwrap()
        };
        let value = |m: MatRef<'_, f64>| -> f64 {
            if joint {
                let j = scaled_hadamard(a.as_ref(), m).unwrap();
                renyi_entropy(j.as_ref(), spec).unwrap()
            } else {
                renyi_entropy(m, spec).unwrap()
            }
        };
        let h = 1e-6;
        for _ in 0..20 {
            let e = random_symmetric_trace_zero(&mut rng, n);
            let scale = 1e-2;
            let e = Mat::from_fn(n, n, |i, j| scale * e.read(i, j));
            let plus = axpy(b.as_ref(), h, e.as_ref());
            let minus = axpy(b.as_ref(), -h, e.as_ref());
            let fd = (value(plus.as_ref()) - value(minus.as_ref())) / (2.0 * h);
            let an = inner(grad.as_ref(), e.as_ref());
            assert!((fd - an).abs() < 1e-5, "fd {fd} vs analytic {an}");
            assert!(
                (fd - an).abs() <= 1e-4 * an.abs().max(1e-3),
                "relative mismatch fd {fd} analytic {an}"
            );
        }
    }

    #[test]
    fn marginal_gradient_matches_finite_differences() {
        for (alpha, seed) in [(1.01, 1), (2.0, 2), (1.5, 3), (0.7, 4)] {
            directional_check(alpha, seed, false);
        }
    }

    #[test]
    fn joint_gradient_matches_finite_differences() {
        for (alpha, seed) in [(1.01, 5), (2.0, 6), (3.0, 7)] {
            directional_check(alpha, seed, true);
        }
    }

    #[test]
    fn entropy_non_increasing_in_alpha() {
        let m = from_rows(&[
            vec![0.25, 0.1, 0.05, 0.0],
            vec![0.1, 0.25, 0.1, 0.02],
            vec![0.05, 0.1, 0.25, 0.1],
            vec![0.0, 0.02, 0.1, 0.25],
        ])
        .unwrap();
        let vals: Vec<f64> = [1.01, 1.5, 2.0, 3.0]
            .iter()
            .map(|&a| renyi_entropy(m.as_ref(), EntropySpec::with_alpha(a).unwrap()).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[0] >= w[1] - 1e-12), "{vals:?}");
        assert!(vals[0] > vals[3]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bounds_and_joint_dominance(
            seed in any::<u64>(),
            n in 2usize..40,
            alpha in prop::sample::select(vec![0.5, 1.01, 1.5, 2.0, 3.0]),
            s1 in 0.1f64..3.0,
            s2 in 0.1f64..3.0,
        ) {
            let spec = EntropySpec::with_alpha(alpha).unwrap();
            let mut rng = RandomStream::new(seed, 0);
            let a = random_gram(&mut rng, n, 2, s1);
            let b = random_gram(&mut rng, n, 3, s2);
            let log_n = (n as f64).log2();
            let sa = renyi_entropy(a.as_ref(), spec).unwrap();
            let sb = renyi_entropy(b.as_ref(), spec).unwrap();
            prop_assert!(sa >= 0.0 && sa <= log_n + 1e-9);
            let j = joint_entropy(&a, &b, spec).unwrap();
            prop_assert!(j >= sa.max(sb) - 1e-9, "joint {} < max({}, {})", j, sa, sb);
            prop_assert!(conditional_entropy(&a, &b, spec).unwrap() >= -1e-9);
        }
    }
}
