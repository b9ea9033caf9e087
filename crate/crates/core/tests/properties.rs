use nalgebra::DMatrix;
use proptest::prelude::*;

use nonclassical::algebra::{normal_order, stirling2, Ladder, NormalForm, OperatorWord};
use nonclassical::herald::{apply_beam_splitter, Mode, MultimodeState};
use nonclassical::moments::{general_moment, number_moment, special_case_diagonal, special_case_real};
use nonclassical::oracle::{LadderMatrices, Oracle};
use nonclassical::phase_space::{husimi_q, psmatrix_det, psmatrix_special, psmatrix_special_ln, q_zero};
use nonclassical::state::{fock_coefficients, fock_coefficients_at};
use nonclassical::sweep::{run_sweep, AlphaGrid, SweepSpec};
use nonclassical::witnesses::{self, WitnessKind};
use nonclassical::{make_state, Complex64, StateParams};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn word() -> impl Strategy<Value = OperatorWord> {
    prop::collection::vec(prop_oneof![Just(Ladder::Annihilate), Just(Ladder::Create)], 0..=8)
        .prop_map(OperatorWord::new)
}

/// `|α| ≤ 3`, `r ∈ [0, 1)`, away from the vanishing-norm corner.
fn params() -> impl Strategy<Value = StateParams> {
    (0.0..3.0f64, 0.0..std::f64::consts::TAU, 0.0..1.0f64)
        .prop_filter_map("normalization too small", |(rho, phi, r)| {
            make_state(Complex64::from_polar(rho, phi), r)
                .ok()
                .filter(|p| p.norm() > 1e-3)
        })
}

fn complex_in(radius: f64) -> impl Strategy<Value = Complex64> {
    (-radius..radius, -radius..radius).prop_map(|(x, y)| c(x, y))
}

fn form_matrix(form: &NormalForm, l: &LadderMatrices) -> DMatrix<Complex64> {
    let dim = l.dim();
    let mut out = DMatrix::zeros(dim, dim);
    for (&(p, q), &coeff) in form.terms() {
        let mut m = DMatrix::identity(dim, dim);
        for _ in 0..p {
            m = &m * &l.create;
        }
        for _ in 0..q {
            m = &m * &l.annihilate;
        }
        out += m * c(coeff as f64, 0.0);
    }
    out
}

fn word_matrix(w: &OperatorWord, l: &LadderMatrices) -> DMatrix<Complex64> {
    let dim = l.dim();
    w.letters().iter().fold(DMatrix::identity(dim, dim), |acc, letter| match letter {
        Ladder::Annihilate => acc * &l.annihilate,
        Ladder::Create => acc * &l.create,
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_order_is_a_homomorphism(w1 in word(), w2 in word()) {
        let joined = normal_order(&w1.concat(&w2)).unwrap();
        let product = normal_order(&w1).unwrap().checked_mul(&normal_order(&w2).unwrap()).unwrap();
        prop_assert_eq!(joined, product);
    }

    #[test]
    fn normal_form_matches_matrix_product(w in word()) {
        let n_max = 20;
        let l = LadderMatrices::new(n_max);
        let nf = form_matrix(&normal_order(&w).unwrap(), &l);
        let direct = word_matrix(&w, &l);
        let interior = n_max + 1 - w.len();
        for i in 0..interior {
            for j in 0..interior {
                let d = (nf[(i, j)] - direct[(i, j)]).norm();
                prop_assert!(d <= 1e-9 * direct[(i, j)].norm().max(1.0), "({i},{j}) {d}");
            }
        }
    }

    #[test]
    fn stirling_recurrence(e in 1u32..=30, f in 1u32..=30) {
        let lhs = stirling2(e, f).unwrap();
        let rhs = f as u128 * stirling2(e - 1, f).unwrap() + stirling2(e - 1, f - 1).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn fock_norm_matches_closed_form(p in params()) {
        let tail = 1e-12;
        let fock = fock_coefficients(&p, tail).unwrap();
        prop_assert!((fock.norm_sqr() - 1.0).abs() <= 10.0 * tail);
        prop_assert!((fock.raw_norm_sqr() / p.norm() - 1.0).abs() <= 10.0 * tail);
    }

    #[test]
    fn conjugate_symmetry(p in params(), m in 0u32..=6, n in 0u32..=6) {
        let a = general_moment(&p, m, n).unwrap();
        let b = general_moment(&p, n, m).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn printed_polynomials_agree(x in -3.0..3.0f64, r in 0.0..1.0f64, m in 0u32..=6, n in 0u32..=6, l in 1u32..=6) {
        let p = make_state(c(x, 0.0), r).unwrap();
        prop_assume!(p.norm() > 1e-3);
        let general = general_moment(&p, m, n).unwrap().re;
        prop_assert!(close(special_case_real(&p, m, n).unwrap(), general, 1e-10));
        let diag = general_moment(&p, l, l).unwrap().re;
        prop_assert!(close(special_case_diagonal(&p, l).unwrap(), diag, 1e-10));
    }

    #[test]
    fn diagonal_polynomial_complex(p in params(), l in 1u32..=6) {
        let diag = general_moment(&p, l, l).unwrap().re;
        prop_assert!(close(special_case_diagonal(&p, l).unwrap(), diag, 1e-10));
    }

    #[test]
    fn moments_match_oracle(p in params()) {
        let oracle = Oracle::for_params(&p, 1e-12).unwrap();
        for m in 0..=6 {
            for n in 0..=6 {
                let closed = general_moment(&p, m, n).unwrap();
                let orc = oracle.moment(m, n).unwrap();
                prop_assert!((closed - orc).norm() / (1.0 + orc.norm()) < 1e-9, "({m},{n}) {closed} vs {orc}");
            }
        }
    }

    #[test]
    fn moments_are_positive(p in params(), j in 0u32..=12, l in 0u32..=8) {
        let scale = p.alpha().norm().max(1.0).powi(2 * j as i32);
        prop_assert!(number_moment(&p, j).unwrap() >= -1e-13 * scale);
        let g = general_moment(&p, l, l).unwrap();
        prop_assert!(g.re >= -1e-13 * p.alpha().norm().max(1.0).powi(2 * l as i32));
    }

    #[test]
    fn coherent_limit_zeroes_witnesses(rho in 0.1..2.0f64, phi in 0.0..std::f64::consts::TAU, l in 2u32..=5, m in 0u32..=10) {
        let p = make_state(Complex64::from_polar(rho, phi), 0.0).unwrap();
        let tol = 1e-10;
        for value in [
            witnesses::mandel_q(&p, 2).unwrap().value,
            witnesses::mandel_q(&p, 3).unwrap().value,
            witnesses::hoa(&p, l).unwrap().value,
            witnesses::hosps(&p, l).unwrap().value,
            witnesses::agarwal_tara(&p).unwrap().value,
            witnesses::klyshko(&p, m).unwrap().value,
        ] {
            prop_assert!(value.abs() < tol, "{value}");
        }
        for even in [2, 4, 6] {
            prop_assert!(witnesses::hos(&p, even).unwrap().value.abs() < tol);
        }
    }

    #[test]
    fn klyshko_sign_theorem(x in 0.05..3.0f64, r in 0.01..0.99f64, m in 0u32..=10) {
        let p = make_state(c(x, 0.0), r).unwrap();
        let rec = witnesses::klyshko(&p, m).unwrap();
        prop_assert!(rec.value < 0.0, "{}", rec.value);
        prop_assert!(rec.secondary.unwrap() < 0.0);
    }

    #[test]
    fn witnesses_are_real(p in params(), l in 2u32..=8) {
        for kind in [WitnessKind::Mandel, WitnessKind::Hoa, WitnessKind::Hosps, WitnessKind::Klyshko] {
            prop_assert!(nonclassical::sweep::evaluate(kind, l, &p, c(0.1, 0.0)).is_ok());
        }
        prop_assert!(witnesses::agarwal_tara(&p).is_ok());
        prop_assert!(witnesses::hos(&p, 2 * (l / 2)).is_ok());
    }

    #[test]
    fn husimi_is_nonnegative(p in params(), beta in complex_in(6.0)) {
        prop_assert!(husimi_q(&p, beta) >= 0.0);
    }

    #[test]
    fn psmatrix_special_is_negative(p in params(), offset in complex_in(3.0)) {
        prop_assume!(p.r() > 1e-3 && offset.norm() > 1e-6);
        let b1 = q_zero(&p).unwrap();
        let ln = psmatrix_special_ln(&p, b1 + offset).unwrap();
        prop_assert!(ln.is_finite());
        // below e^-700 the value underflows to −0
        if ln > -700.0 {
            prop_assert!(psmatrix_special(&p, b1 + offset).unwrap() < 0.0);
        }
    }

    #[test]
    fn psmatrix_is_symmetric(p in params(), b1 in complex_in(3.0), b2 in complex_in(3.0)) {
        let d12 = psmatrix_det(&p, b1, b2);
        let d21 = psmatrix_det(&p, b2, b1);
        prop_assert!((d12 - d21).abs() <= 1e-15 * d12.abs().max(1e-300) + 1e-300);
    }

    #[test]
    fn oracle_is_truncation_stable(p in params()) {
        let base = Oracle::for_params(&p, 1e-12).unwrap();
        let doubled = Oracle::new(fock_coefficients_at(&p, 2 * base.n_max()).unwrap());
        for m in 0..=4 {
            for n in 0..=4 {
                let a = base.moment(m, n).unwrap();
                let b = doubled.moment(m, n).unwrap();
                prop_assert!((a - b).norm() < 1e-10 * a.norm().max(1.0));
            }
        }
        for k in 0..=10 {
            prop_assert!((base.pm(k).unwrap() - doubled.pm(k).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn beam_splitter_preserves_norm(
        amps in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 27),
        theta in 0.0..std::f64::consts::FRAC_PI_2,
        phase_t in 0.0..std::f64::consts::TAU,
        phase_r in 0.0..std::f64::consts::TAU,
        pair in 0usize..3,
    ) {
        // populated up to 2 photons per mode, caps leave room for 4 in any mode
        let mut s = MultimodeState::zeros([4, 4, 4]);
        for (idx, &(x, y)) in amps.iter().enumerate() {
            *s.get_mut(idx / 9, (idx / 3) % 3, idx % 3) = c(x, y);
        }
        let t = Complex64::from_polar(theta.cos(), phase_t);
        let r = Complex64::from_polar(theta.sin(), phase_r);
        let modes = [(Mode::A, Mode::B), (Mode::B, Mode::C), (Mode::C, Mode::A)][pair];
        let out = apply_beam_splitter(&s, modes, t, r).unwrap();
        prop_assert!((out.norm_sqr() - s.norm_sqr()).abs() <= 1e-12 * s.norm_sqr());
    }

    #[test]
    fn sweeps_never_drop_rows(count in 2usize..12, n_r in 1usize..4, orders in prop::collection::vec(2u32..=5, 1..3)) {
        let spec = SweepSpec {
            witnesses: vec![WitnessKind::Mandel, WitnessKind::AgarwalTara, WitnessKind::Psmatrix],
            orders,
            r_values: (0..n_r).map(|i| i as f64 / n_r as f64).collect(),
            alpha: AlphaGrid::Real { start: 0.0, stop: 2.0, count, exclude_start: false },
            beta: c(0.1, 0.0),
        };
        let rows = run_sweep(&spec).unwrap();
        prop_assert_eq!(rows.len(), spec.row_count());
    }
}

#[test]
fn push_through_identity() {
    // a^{p+1} a† = (p+1) a^p + a† a^{p+1}
    for p in 0..=6u32 {
        let w = OperatorWord::identity()
            .then(Ladder::Annihilate, p as usize + 1)
            .then(Ladder::Create, 1);
        let expect = NormalForm::monomial(0, p, (p + 1) as i128)
            .checked_add(&NormalForm::monomial(1, p + 1, 1))
            .unwrap();
        assert_eq!(normal_order(&w).unwrap(), expect);
    }
}

#[test]
fn commutator_on_interior_block() {
    let l = LadderMatrices::new(30);
    let comm = &l.annihilate * &l.create - &l.create * &l.annihilate;
    for i in 0..30 {
        for j in 0..30 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((comm[(i, j)] - c(expect, 0.0)).norm() < 1e-13);
        }
    }
}

#[test]
fn coherent_fock_vector_is_exact() {
    let alpha = c(1.3, -0.4);
    let p = make_state(alpha, 0.0).unwrap();
    let fock = fock_coefficients(&p, 1e-12).unwrap();
    let coh = nonclassical::state::coherent_amplitudes(alpha, fock.n_max());
    let norm: f64 = coh.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    // t a|α⟩ = α|α⟩ carries the global phase α/|α|
    let phase = alpha / alpha.norm();
    for (a, b) in fock.amplitudes().iter().zip(&coh) {
        assert!((a - phase * b / norm).norm() < 1e-12);
    }
}
