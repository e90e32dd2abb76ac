//! Index values against a brute-force search over all chord quadruples of
//! a 200-point grid.

use sdrdu_core::indices::{greediness, pessimism, q_index, Extended, IndexMethod};
use sdrdu_core::{
    Domain, PiecewisePolynomial, Polynomial, UtilityFunction as U, WeightingFunction as H,
};

const GRID: usize = 200;

fn grid(lo: f64, hi: f64) -> Vec<f64> {
    (0..GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (GRID - 1) as f64)
        .collect()
}

/// Extremal ratio chord(x3, x4) / chord(x1, x2) over grid points with
/// x1 < x2 <= x3 < x4; `sup` selects the direction.
fn brute_chord_ratio(f: impl Fn(f64) -> f64, lo: f64, hi: f64, sup: bool) -> f64 {
    let xs = grid(lo, hi);
    let v: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let chord = |i: usize, j: usize| (v[j] - v[i]) / (xs[j] - xs[i]);
    let better = |a: f64, b: f64| if sup { a > b } else { a < b };
    let mut best = if sup {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    for i in 0..GRID {
        for j in i + 1..GRID {
            for k in j..GRID {
                for l in k + 1..GRID {
                    let den = chord(i, j);
                    let num = chord(k, l);
                    let r = if den > 0.0 {
                        num / den
                    } else if num > 0.0 {
                        f64::INFINITY
                    } else {
                        continue;
                    };
                    if better(r, best) {
                        best = r;
                    }
                }
            }
        }
    }
    best
}

fn brute_pessimism(h: &H) -> f64 {
    grid(0.0, 1.0)[1..GRID - 1]
        .iter()
        .map(|&s| {
            let v = h.eval(s).unwrap();
            if v > 0.0 {
                (1.0 - v) * s / ((1.0 - s) * v)
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn pl_u(slopes: &[f64]) -> U {
    let bps: Vec<f64> = (0..=slopes.len()).map(|i| i as f64).collect();
    let mut vals = vec![0.0];
    for s in slopes {
        vals.push(vals.last().unwrap() + s);
    }
    U::piecewise_linear(bps, vals).unwrap()
}

fn pl_h(slopes: &[f64]) -> H {
    let k = slopes.len() as f64;
    let total: f64 = slopes.iter().sum();
    let mut bps = vec![0.0];
    let mut vals = vec![0.0];
    for (i, s) in slopes.iter().enumerate() {
        bps.push((i + 1) as f64 / k);
        vals.push(vals[i] + s / total);
    }
    *bps.last_mut().unwrap() = 1.0;
    *vals.last_mut().unwrap() = 1.0;
    H::piecewise_linear(bps, vals).unwrap()
}

fn finite(v: Extended<f64>) -> f64 {
    v.finite().expect("finite index")
}

#[test]
fn greediness_of_piecewise_linear_fixtures() {
    for slopes in [
        vec![1.0, 2.0],
        vec![2.0, 1.0],
        vec![1.0, 3.0],
        vec![0.5, 2.0, 1.0, 4.0],
    ] {
        let u = pl_u(&slopes);
        let g = greediness(&u).unwrap();
        assert_eq!(g.method, IndexMethod::ExactPiecewise);
        let (a, b) = (u.domain().lo(), u.domain().hi());
        let oracle = brute_chord_ratio(|x| u.value(x).unwrap(), a, b, true);
        assert!(
            (finite(g.value) - oracle).abs() <= 1e-6,
            "{slopes:?}: {} vs {oracle}",
            finite(g.value)
        );
    }
    assert_eq!(
        greediness(&pl_u(&[1.0, 2.0])).unwrap().value,
        Extended::Finite(2.0)
    );
}

#[test]
fn greediness_of_smooth_forms() {
    let d = Domain::new(0.5, 2.0).unwrap();
    // Convex: u'(b) / u'(a) = 12 / 0.75.
    let cube = U::power(d, 3.0).unwrap();
    let g = finite(greediness(&cube).unwrap().value);
    assert!((g - 16.0).abs() <= 1e-6);
    let oracle = brute_chord_ratio(|x| x * x * x, 0.5, 2.0, true);
    assert!(g >= oracle - 1e-9 && g - oracle < 0.05 * g);
    // Concave: every later chord is flatter.
    let exp = U::exponential(d, 1.5).unwrap();
    let g = finite(greediness(&exp).unwrap().value);
    assert!((g - 1.0).abs() <= 1e-9);
    // Ratio one is only reached in the limit of adjacent chords.
    let oracle = brute_chord_ratio(|x| -(-1.5 * x).exp(), 0.5, 2.0, true);
    assert!(oracle <= g && g - oracle < 0.05);
}

#[test]
fn greediness_is_affine_invariant() {
    let base = pl_u(&[0.5, 2.0, 1.0, 4.0]);
    let (bps, vals) = match base.form() {
        sdrdu_core::utility::UtilityForm::PiecewiseLinear {
            breakpoints,
            values,
        } => (breakpoints.clone(), values.clone()),
        _ => unreachable!(),
    };
    let g0 = finite(greediness(&base).unwrap().value);
    for (alpha, beta) in [(3.0, -1.0), (0.25, 7.0)] {
        let scaled =
            U::piecewise_linear(bps.clone(), vals.iter().map(|v| alpha * v + beta).collect())
                .unwrap();
        assert!((finite(greediness(&scaled).unwrap().value) - g0).abs() <= 1e-12);
    }
    // Grid path: a convex quadratic and its rescaling.
    let quad = |alpha: f64, beta: f64| {
        let p = Polynomial::new(vec![beta, 0.0, alpha]).unwrap();
        U::piecewise_poly(PiecewisePolynomial::from_global(vec![0.5, 2.0], vec![p]).unwrap())
            .unwrap()
    };
    let g1 = finite(greediness(&quad(1.0, 0.0)).unwrap().value);
    let g2 = finite(greediness(&quad(5.0, -2.0)).unwrap().value);
    assert!((g1 - 4.0).abs() <= 1e-6);
    assert!((g1 - g2).abs() <= 1e-9);
}

#[test]
fn pessimism_fixtures() {
    let id = pessimism(&H::identity()).unwrap();
    assert_eq!(id.value, Extended::Finite(1.0));
    assert!((brute_pessimism(&H::identity()) - 1.0).abs() <= 1e-12);

    let sq = H::power(2.0).unwrap();
    let p = finite(pessimism(&sq).unwrap().value);
    assert!((p - 2.0).abs() <= 1e-5);
    // The grid infimum approaches from above as the grid refines: (1 + s) / s.
    let oracle = brute_pessimism(&sq);
    let last = (GRID - 2) as f64 / (GRID - 1) as f64;
    assert!((oracle - (1.0 + last) / last).abs() <= 1e-12);
    assert!(p <= oracle);

    assert_eq!(
        pessimism(&H::indicator_one()).unwrap().value,
        Extended::Infinite
    );
    assert_eq!(brute_pessimism(&H::indicator_one()), f64::INFINITY);
}

#[test]
fn pessimism_of_piecewise_linear_matches_grid() {
    for slopes in [vec![1.0, 2.0], vec![2.0, 1.0], vec![0.3, 1.0, 3.0]] {
        let h = pl_h(&slopes);
        let p = pessimism(&h).unwrap();
        assert_eq!(p.method, IndexMethod::ExactPiecewise);
        let p = finite(p.value);
        let oracle = brute_pessimism(&h);
        assert!(p <= oracle + 1e-12);
        // Every candidate is within one grid cell of a grid point.
        assert!(
            oracle - p <= 0.05 * p.max(1.0),
            "{slopes:?}: {p} vs {oracle}"
        );
    }
}

#[test]
fn q_index_fixtures() {
    assert_eq!(
        q_index(&H::identity()).unwrap().value,
        Extended::Finite(1.0)
    );
    for (slopes, expect) in [
        (vec![2.0, 1.0], 0.5),
        (vec![1.0, 2.0], 1.0),
        (vec![1.0, 2.0, 4.0], 1.0),
    ] {
        let h = pl_h(&slopes);
        let q = finite(q_index(&h).unwrap().value);
        assert!((q - expect).abs() <= 1e-12);
        let oracle = brute_chord_ratio(|s| h.eval(s).unwrap(), 0.0, 1.0, false);
        assert!((q - oracle).abs() <= 1e-6, "{slopes:?}: {q} vs {oracle}");
    }
}

#[test]
fn convex_piecewise_linear_weights_have_unit_q() {
    for slopes in [vec![0.5, 0.5, 3.0], vec![0.1, 0.2, 0.3, 10.0]] {
        assert_eq!(
            q_index(&pl_h(&slopes)).unwrap().value,
            Extended::Finite(1.0)
        );
    }
}
