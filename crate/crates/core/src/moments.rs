//! Closed-form moments of `|ψ⟩ = N^{-1/2}(t a + r a†)|α⟩`.
//!
//! Every moment is reduced to coherent-state expectations of normally
//! ordered forms:
//!
//! `⟨a†ᵐaⁿ⟩ = N⁻¹ ⟨α| t² a†ᵐ⁺¹aⁿ⁺¹ + r² a a†ᵐaⁿa† + rt a†ᵐ⁺¹aⁿa† + rt a a†ᵐaⁿ⁺¹ |α⟩`
//!
//! which has no negative powers of `α`, so the Fock limit `α = 0` is regular.

use num_complex::Complex64;

use crate::algebra::{binomial, coherent_expectation, normal_order, stirling2, Ladder, NormalForm, OperatorWord};
use crate::error::{Error, Result};
use crate::state::StateParams;

/// Largest dagger or annihilation power accepted by [`general_moment`].
pub const MAX_MOMENT_ORDER: u32 = 16;
pub const MAX_NUMBER_MOMENT: u32 = 12;
pub const MAX_CENTRAL_ORDER: u32 = 10;

const REAL_TOL: f64 = 1e-10;

/// A validated `(m, n)` pair for `⟨a†ᵐaⁿ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MomentRequest {
    pub m: u32,
    pub n: u32,
}

impl MomentRequest {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m > MAX_MOMENT_ORDER || n > MAX_MOMENT_ORDER {
            return Err(Error::out_of_range(format!(
                "moment orders ({m}, {n}) exceed {MAX_MOMENT_ORDER}"
            )));
        }
        Ok(MomentRequest { m, n })
    }

    /// The four normally ordered pieces, weighted by `t²`, `r²`, `rt`, `rt`.
    fn forms(&self) -> Result<[NormalForm; 4]> {
        use Ladder::{Annihilate as A, Create as C};
        let (m, n) = (self.m as usize, self.n as usize);
        let core = OperatorWord::monomial(m, n);
        let a = OperatorWord::new(vec![A]);
        let ad = OperatorWord::new(vec![C]);
        Ok([
            normal_order(&ad.concat(&core).then(A, 1))?,
            normal_order(&a.concat(&core).then(C, 1))?,
            normal_order(&ad.concat(&core).then(C, 1))?,
            normal_order(&a.concat(&core).then(A, 1))?,
        ])
    }
}

pub(crate) fn to_real(z: Complex64) -> Result<f64> {
    if z.im.abs() > REAL_TOL * z.re.abs().max(1.0) {
        return Err(Error::NonReal { real: z.re, imag: z.im });
    }
    Ok(z.re)
}

/// `⟨a†ᵐaⁿ⟩` for the normalized state.
pub fn general_moment(params: &StateParams, m: u32, n: u32) -> Result<Complex64> {
    let req = MomentRequest::new(m, n)?;
    let (t, r, alpha) = (params.t(), params.r(), params.alpha());
    let [ends, middle, left, right] = req.forms()?;
    let sum = t * t * coherent_expectation(&ends, alpha)
        + r * r * coherent_expectation(&middle, alpha)
        + r * t * (coherent_expectation(&left, alpha) + coherent_expectation(&right, alpha));
    Ok(sum / params.norm())
}

fn monomial_real(coeff: f64, alpha: f64, power: i32) -> f64 {
    if coeff == 0.0 {
        0.0
    } else {
        coeff * alpha.powi(power)
    }
}

/// The real-`α` polynomial
/// `N⁻¹[(2rt+1)α^{m+n+2} + {r²(m+n+1) + rt(m+n)}α^{m+n} + r²mn α^{m+n−2}]`.
pub fn special_case_real(params: &StateParams, m: u32, n: u32) -> Result<f64> {
    MomentRequest::new(m, n)?;
    let alpha = params.alpha();
    if alpha.im != 0.0 {
        return Err(Error::domain("special_case_real needs a real alpha"));
    }
    let (t, r, x) = (params.t(), params.r(), alpha.re);
    let (mf, nf) = (m as f64, n as f64);
    let s = (m + n) as i32;
    let value = monomial_real(2.0 * r * t + 1.0, x, s + 2)
        + monomial_real(r * r * (mf + nf + 1.0) + r * t * (mf + nf), x, s)
        + monomial_real(r * r * mf * nf, x, s - 2);
    Ok(value / params.norm())
}

/// The diagonal polynomial for `l ≥ 1`:
/// `N⁻¹|α|^{2(l−1)}[|α|⁴ + r²{l² + (2l+1)|α|²} + rt(l + |α|²)(α² + α*²)]`.
pub fn special_case_diagonal(params: &StateParams, l: u32) -> Result<f64> {
    if l == 0 {
        return Err(Error::domain("special_case_diagonal needs l >= 1"));
    }
    MomentRequest::new(l, l)?;
    let (t, r, alpha) = (params.t(), params.r(), params.alpha());
    let mu = alpha.norm_sqr();
    let lf = l as f64;
    let bracket = mu * mu
        + r * r * (lf * lf + (2.0 * lf + 1.0) * mu)
        + r * t * (lf + mu) * 2.0 * (alpha * alpha).re;
    Ok(mu.powi(l as i32 - 1) * bracket / params.norm())
}

/// `⟨(a†a)ʲ⟩ = Σₙ S(j, n) ⟨a†ⁿaⁿ⟩`.
pub fn number_moment(params: &StateParams, j: u32) -> Result<f64> {
    if j > MAX_NUMBER_MOMENT {
        return Err(Error::out_of_range(format!(
            "number moment order {j} exceeds {MAX_NUMBER_MOMENT}"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..=j {
        let s = stirling2(j, n)?;
        if s != 0 {
            acc += s as f64 * general_moment(params, n, n)?;
        }
    }
    to_real(acc)
}

/// All of `⟨(a†a)ʲ⟩` for `j = 0..=order`.
pub(crate) fn number_moments(params: &StateParams, order: u32) -> Result<Vec<f64>> {
    (0..=order).map(|j| number_moment(params, j)).collect()
}

/// `⟨(ΔN)ˡ⟩ = Σₖ C(l,k)(−⟨N⟩)ᵏ ⟨N^{l−k}⟩`.
pub fn central_number_moment(params: &StateParams, l: u32) -> Result<f64> {
    if l == 0 || l > MAX_CENTRAL_ORDER {
        return Err(Error::out_of_range(format!(
            "central moment order {l} must be in 1..={MAX_CENTRAL_ORDER}"
        )));
    }
    if l == 1 {
        return Ok(0.0);
    }
    let raw = number_moments(params, l)?;
    Ok(centralize(&raw, l))
}

/// Binomial centering of raw moments `raw[k] = ⟨Aᵏ⟩` (with `raw[0] = 1`).
pub(crate) fn centralize(raw: &[f64], l: u32) -> f64 {
    let mean = raw[1];
    (0..=l)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(l, k) as f64 * mean.powi(k as i32) * raw[(l - k) as usize]
        })
        .sum()
}

/// Normal form of `(a + a†)ᵏ`.
pub(crate) fn quadrature_power_form(k: u32) -> Result<NormalForm> {
    let mut form = NormalForm::identity();
    for _ in 0..k {
        form = form
            .mul_letter(Ladder::Annihilate)?
            .checked_add(&form.mul_letter(Ladder::Create)?)?;
    }
    Ok(form)
}

/// `⟨Xᵏ⟩` with `X = (a + a†)/√2`.
pub fn quadrature_moment(params: &StateParams, k: u32) -> Result<f64> {
    if k > MAX_CENTRAL_ORDER {
        return Err(Error::out_of_range(format!(
            "quadrature moment order {k} exceeds {MAX_CENTRAL_ORDER}"
        )));
    }
    let form = quadrature_power_form(k)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&(p, q), &c) in form.terms() {
        acc += c as f64 * general_moment(params, p, q)?;
    }
    to_real(acc * 2f64.powf(-(k as f64) / 2.0))
}

/// `⟨(ΔX)ˡ⟩` for even `l`, with `X = (a + a†)/√2`.
///
/// Central moments are displacement invariant and
/// `(ta + ra†)|α⟩ = D(α)[(tα + rα*)|0⟩ + r|1⟩]`, so the centering is done on
/// the two-level state, which avoids cancelling terms of size `|α|ˡ`.
pub fn quadrature_central_moment(params: &StateParams, l: u32) -> Result<f64> {
    if l % 2 != 0 || l == 0 {
        return Err(Error::domain(format!(
            "quadrature central moment needs an even order, got {l}"
        )));
    }
    if l > MAX_CENTRAL_ORDER {
        return Err(Error::out_of_range(format!(
            "quadrature central moment order {l} exceeds {MAX_CENTRAL_ORDER}"
        )));
    }
    let (t, r, alpha) = (params.t(), params.r(), params.alpha());
    let c0 = t * alpha + r * alpha.conj();
    let n = params.norm();
    // ⟨a†ᵖaᵠ⟩ in the two-level frame; zero once p or q exceeds 1
    let low = |p: u32, q: u32| -> Complex64 {
        match (p, q) {
            (0, 0) => Complex64::new(1.0, 0.0),
            (1, 1) => Complex64::new(r * r / n, 0.0),
            (0, 1) => c0.conj() * r / n,
            (1, 0) => c0 * r / n,
            _ => Complex64::new(0.0, 0.0),
        }
    };
    let raw = (0..=l)
        .map(|k| {
            let form = quadrature_power_form(k)?;
            let acc: Complex64 = form
                .terms()
                .iter()
                .map(|(&(p, q), &c)| c as f64 * low(p, q))
                .sum();
            to_real(acc * 2f64.powf(-(k as f64) / 2.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(centralize(&raw, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::make_state;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coherent_limit() {
        let alpha = c(0.7, -0.4);
        let p = make_state(alpha, 0.0).unwrap();
        for m in 0..5 {
            for n in 0..5 {
                let expect = alpha.conj().powu(m) * alpha.powu(n);
                assert!((general_moment(&p, m, n).unwrap() - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn single_photon_limit() {
        let p = make_state(c(0.0, 0.0), 1.0).unwrap();
        assert!((general_moment(&p, 1, 1).unwrap() - 1.0).norm() < 1e-15);
        assert!(general_moment(&p, 2, 2).unwrap().norm() < 1e-15);
        assert_eq!(special_case_real(&p, 2, 2).unwrap(), 0.0);
        for j in 1..=12 {
            assert!((number_moment(&p, j).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_photon_number_printed_case() {
        let p = make_state(c(1.0, 0.0), 0.2).unwrap();
        let (t, r) = (p.t(), p.r());
        let printed = ((2.0 * r * t + 1.0) + (3.0 * r * r + 2.0 * r * t) + r * r) / p.norm();
        let gm = general_moment(&p, 1, 1).unwrap();
        assert!((gm.re - printed).abs() < 1e-14);
        assert!((gm.re - 1.3575).abs() < 1e-4);
        assert!((special_case_real(&p, 1, 1).unwrap() - gm.re).abs() < 1e-12);
    }

    #[test]
    fn real_polynomial_matches() {
        for &(a, r) in &[(1.0, 0.2), (0.3, 0.94), (-1.7, 0.38), (2.5, 0.6)] {
            let p = make_state(c(a, 0.0), r).unwrap();
            for m in 0..7 {
                for n in 0..7 {
                    let gm = general_moment(&p, m, n).unwrap();
                    let poly = special_case_real(&p, m, n).unwrap();
                    assert!((gm.re - poly).abs() < 1e-10 * (1.0 + poly.abs()), "{a} {r} {m} {n}");
                    assert!(gm.im.abs() < 1e-12);
                }
            }
        }
        let p = make_state(c(1.0, 0.5), 0.2).unwrap();
        assert!(matches!(special_case_real(&p, 1, 1), Err(Error::Domain(_))));
        let p = make_state(c(3.0, 0.0), 0.0).unwrap();
        assert!((special_case_real(&p, 2, 3).unwrap() - 243.0).abs() < 1e-10);
    }

    #[test]
    fn diagonal_polynomial_matches() {
        for &(re, im, r) in &[(1.0, 0.0, 0.2), (0.5, 0.7, 0.38), (-1.1, 0.4, 0.94)] {
            let p = make_state(c(re, im), r).unwrap();
            for l in 1..8 {
                let gm = general_moment(&p, l, l).unwrap();
                let poly = special_case_diagonal(&p, l).unwrap();
                assert!((gm.re - poly).abs() < 1e-10 * (1.0 + poly.abs()));
            }
        }
    }

    #[test]
    fn order_caps() {
        let p = make_state(c(1.0, 0.0), 0.2).unwrap();
        assert!(general_moment(&p, 16, 16).is_ok());
        assert!(matches!(general_moment(&p, 17, 0), Err(Error::OutOfRange(_))));
        assert!(number_moment(&p, 13).is_err());
        assert!(quadrature_central_moment(&p, 3).is_err());
        assert!(quadrature_central_moment(&p, 12).is_err());
    }

    #[test]
    fn number_moments_coherent() {
        let p = make_state(c(1.0, 0.0), 0.0).unwrap();
        assert!((number_moment(&p, 1).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(central_number_moment(&p, 1).unwrap(), 0.0);
        assert!((central_number_moment(&p, 2).unwrap() - 1.0).abs() < 1e-13);
        assert!((central_number_moment(&p, 4).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_coherent_values() {
        for &alpha in &[c(1e-3, 0.0), c(1.0, 0.0), c(-0.4, 1.3), c(3.0, 0.0)] {
            let p = make_state(alpha, 0.0).unwrap();
            assert!((quadrature_central_moment(&p, 2).unwrap() - 0.5).abs() < 1e-12);
            assert!((quadrature_central_moment(&p, 4).unwrap() - 0.75).abs() < 1e-12);
            assert!((quadrature_central_moment(&p, 6).unwrap() - 1.875).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_form_is_hermite_like() {
        // (a + a†)² = a†² + 2a†a + a² + 1
        let f = quadrature_power_form(2).unwrap();
        assert_eq!(f.coeff(2, 0), 1);
        assert_eq!(f.coeff(1, 1), 2);
        assert_eq!(f.coeff(0, 2), 1);
        assert_eq!(f.coeff(0, 0), 1);
    }
}
