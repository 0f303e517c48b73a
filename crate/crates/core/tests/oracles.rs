//! Cross-checks against implementations that share no code with the crate.

use nalgebra::{Complex as NComplex, DMatrix};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ternary_stab::control::{phi_tilde, ControlArgs, ControlFunction};
use ternary_stab::hyers::cauchy_gap_bound;
use ternary_stab::map::FnMap;
use ternary_stab::spectral::singular_values;
use ternary_stab::ternary::{random_element, RingElement};
use ternary_stab::trif::{d_mu_defect, substituted_tuple, trif_defect};
use ternary_stab::{Element, Shape, TernaryMap, TrifParams};

fn to_na(x: &Element) -> DMatrix<NComplex<f64>> {
    DMatrix::from_fn(x.rows(), x.cols(), |i, j| {
        let z = x.get(i, j);
        NComplex::new(z.re, z.im)
    })
}

type NMat = DMatrix<NComplex<f64>>;

fn na_norm(m: &DMatrix<NComplex<f64>>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Largest singular value by power iteration on `A* A`.
fn power_norm(m: &DMatrix<NComplex<f64>>) -> f64 {
    let g = m.adjoint() * m;
    let mut v = DMatrix::from_fn(g.nrows(), 1, |i, _| {
        NComplex::new(1.0 + i as f64 * 0.37, 0.1 * i as f64)
    });
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w = &g * &v;
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        v = w / NComplex::new(n, 0.0);
        let next = n;
        if (next - lambda).abs() <= 1e-15 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

#[test]
fn spectral_norm_matches_svd_and_power_iteration() {
    let shapes = [(1, 1), (2, 2), (3, 2), (2, 5), (4, 4), (6, 3)];
    for (k, &(r, c)) in shapes.iter().enumerate() {
        for seed in 0..40u64 {
            let s = Shape::new(r, c).unwrap();
            let x = random_element::<f64>(s, 1.0 + seed as f64, seed * 31 + k as u64);
            let ours = x.norm();
            let na = to_na(&x);
            let svd = na_norm(&na);
            assert!(
                (ours - svd).abs() <= 1e-10 * svd.max(1e-300),
                "{r}x{c}: {ours} vs {svd}"
            );
            let pw = power_norm(&na);
            assert!((ours - pw).abs() <= 1e-6 * svd, "{r}x{c}: {ours} vs power {pw}");
            let sv = singular_values(&x);
            let mut theirs: Vec<f64> = na.svd(false, false).singular_values.iter().copied().collect();
            theirs.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in sv.iter().zip(&theirs) {
                assert!((a - b).abs() <= 1e-10 * svd);
            }
        }
    }
}

#[test]
fn spectral_norm_of_badly_scaled_matrices() {
    for e in [-150i32, -20, 0, 20, 150] {
        let s = Shape::new(3, 2).unwrap();
        let x = random_element::<f64>(s, 1.0, 9).scale_real(10f64.powi(e));
        let svd = na_norm(&to_na(&x));
        assert!((x.norm() - svd).abs() <= 1e-10 * svd);
    }
}

/// `D_mu f` written directly with nalgebra matrices and index loops.
#[allow(clippy::too_many_arguments)]
fn d_mu_oracle(
    f: &dyn Fn(&NMat) -> NMat,
    d: usize,
    l: usize,
    mu: NComplex<f64>,
    xs: &[DMatrix<NComplex<f64>>],
    u: &DMatrix<NComplex<f64>>,
    v: &DMatrix<NComplex<f64>>,
    w: &DMatrix<NComplex<f64>>,
) -> f64 {
    let binom = |n: usize, k: usize| -> f64 {
        if k > n {
            return 0.0;
        }
        (0..k)
            .fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
            .round()
    };
    let c2 = binom(d - 2, l - 2);
    let c1 = binom(d - 2, l - 1);
    let (r, c) = xs[0].shape();
    let mut sum = DMatrix::zeros(r, c);
    for x in xs {
        sum += x * mu;
    }
    let uvw = u * v.adjoint() * w;
    let lead_arg = sum / NComplex::new(d as f64, 0.0) + uvw / NComplex::new(d as f64 * c2, 0.0);
    let mut total = f(&lead_arg) * NComplex::new(d as f64 * c2, 0.0);
    for x in xs {
        total += f(x) * (mu * c1);
    }
    // every l-subset through its bitmask
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize != l {
            continue;
        }
        let mut part = DMatrix::zeros(r, c);
        for (j, x) in xs.iter().enumerate() {
            if mask & (1 << j) != 0 {
                part += x;
            }
        }
        total -= f(&(part / NComplex::new(l as f64, 0.0))) * (mu * l as f64);
    }
    total -= f(u) * f(v).adjoint() * f(w);
    total.clone().svd(false, false).singular_values.max()
}

#[test]
fn d_mu_defect_matches_independent_implementation() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let s = Shape::new(2, 3).unwrap();
    let a = random_element::<f64>(Shape::new(2, 2).unwrap(), 1.0, 1);
    let a_na = to_na(&a);
    // f(x) = A x + x x* x / 4, a cubic map
    let ours = FnMap::endo(s, move |x: &Element| {
        &a.matmul(x).unwrap() + &x.tprod(x, x).unwrap().scale_real(0.25)
    });
    let theirs = move |x: &DMatrix<NComplex<f64>>| &a_na * x + x * x.adjoint() * x * NComplex::new(0.25, 0.0);
    for (d, l) in [(3, 2), (4, 2), (4, 3), (5, 3), (6, 2)] {
        let p = TrifParams::new(d, l).unwrap();
        for k in 0..20u64 {
            let xs: Vec<Element> = (0..d)
                .map(|j| random_element(s, 2.0, 1000 * k + j as u64))
                .collect();
            let u = random_element::<f64>(s, 1.5, 5000 + k);
            let v = random_element::<f64>(s, 1.5, 6000 + k);
            let w = random_element::<f64>(s, 1.5, 7000 + k);
            let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let mu = Complex::from_polar(1.0, theta);
            let got = d_mu_defect(&ours, &p, mu, &xs, &u, &v, &w).unwrap();
            let xs_na: Vec<_> = xs.iter().map(to_na).collect();
            let want = d_mu_oracle(
                &theirs,
                d,
                l,
                NComplex::new(mu.re, mu.im),
                &xs_na,
                &to_na(&u),
                &to_na(&v),
                &to_na(&w),
            );
            assert!(
                (got - want).abs() <= 1e-10 * want.max(1.0),
                "(d,l)=({d},{l}): {got} vs {want}"
            );
        }
    }
}

#[test]
fn trif_defect_at_substituted_tuple_is_the_collapse_expression() {
    let s = Shape::square(2).unwrap();
    let f = FnMap::endo(s, |x: &Element| {
        let n = x.norm();
        x.scale_real(n.sin()) // f(0) = 0
    });
    for (d, l) in [(3, 2), (4, 3), (5, 2), (7, 4)] {
        let p = TrifParams::new(d, l).unwrap();
        for k in 0..30 {
            let x = random_element::<f64>(s, 2.0, k);
            let via_trif = trif_defect(&f, &p, &substituted_tuple(&p, &x), Complex::new(1.0, 0.0)).unwrap();
            let q = p.q_real::<f64>();
            let c1 = p.c_dm2_lm1() as f64;
            let den = p.bound_denominator() as f64;
            let direct = (&f.apply(&x.scale_real(q)).scale_real(c1) - &f.apply(&x).scale_real(den)).norm();
            assert!((via_trif - direct).abs() <= 1e-12 * direct.max(1.0));
        }
    }
}

/// `sum_{j=m}^{m+terms-1} q^-j phi(q^j a)` with the control written out by hand.
fn direct_series(q: f64, eps: f64, p: f64, norms: &[f64], m: usize, terms: usize) -> f64 {
    (m..m + terms)
        .map(|j| {
            let qj = q.powi(j as i32);
            let phi: f64 = norms
                .iter()
                .map(|&n| if n == 0.0 { 0.0 } else { eps * (n * qj).powf(p) })
                .sum();
            phi / qj
        })
        .sum()
}

#[test]
fn cauchy_bound_matches_direct_summation() {
    let s = Shape::square(2).unwrap();
    for (d, l) in [(3, 2), (4, 2), (4, 3)] {
        let p = TrifParams::new(d, l).unwrap();
        let q = p.q_real::<f64>();
        let pre = 1.0 / p.bound_denominator() as f64;
        for (eps, pw) in [(1.0, 0.0), (0.5, 0.5), (2.0, 0.9)] {
            let cf = ControlFunction::pnorm(eps, pw);
            let x = random_element::<f64>(s, 2.0, (d * 10 + l) as u64);
            let norms: Vec<f64> = substituted_tuple(&p, &x).iter().map(|e| e.norm()).collect();
            for m in [0usize, 1, 3, 7] {
                let finite: f64 = cauchy_gap_bound(&p, &cf, &x, m, Some(m + 5), 60).unwrap();
                let want = pre * direct_series(q, eps, pw, &norms, m, 5);
                assert!((finite - want).abs() <= 1e-12 * want);
                let tail: f64 = cauchy_gap_bound(&p, &cf, &x, m, None, 60).unwrap();
                // a long direct sum plus its exact geometric remainder
                let n = 150;
                let rho = q.powf(pw - 1.0);
                let head = direct_series(q, eps, pw, &norms, m, n);
                let rest = direct_series(q, eps, pw, &norms, m + n, 1) / (1.0 - rho);
                let want = pre * (head + rest);
                assert!((tail - want).abs() <= 1e-10 * want, "{tail} vs {want}");
            }
        }
    }
}

#[test]
fn phi_tilde_closed_forms() {
    let p = TrifParams::new(3, 2).unwrap();
    let x = RingElement::<f64>::identity(2).unwrap();
    let args = ControlArgs::trif_only(substituted_tuple(&p, &x));
    let c = phi_tilde(&ControlFunction::constant(13.0), &p, &args, 60, 1e-16).unwrap();
    assert!((c.upper() - 52.0 / 3.0).abs() < 1e-12);
    assert!((c.closed_form_value.unwrap() - 52.0 / 3.0).abs() < 1e-12);
}
