use heilbronn_core::bnb::{solve, SearchParams};
use heilbronn_core::exact::{interval_eval, rat, AlgebraicExpr, QuadExt};
use heilbronn_core::geometry::{apply_symmetry, min_triangle_area, signed_area_of, Configuration, D4};
use heilbronn_core::heuristic::{polish_point, random_start};
use heilbronn_core::model::{build_baseline, build_final, product_index};
use heilbronn_core::relax::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use heilbronn_core::relax::{mccormick_rows, xc, yc, BinDomain, Interval, NodeBounds, Relaxation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sub_interval() -> impl Strategy<Value = (f64, f64, f64)> {
    // (lo, hi, point) with 0 <= lo <= point <= hi <= 1
    (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(a, b, t)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        (lo, hi, lo + t * (hi - lo))
    })
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (0.0..=1.0f64, 0.0..=1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn mccormick_rows_contain_the_product((xl, xu, x) in sub_interval(), (yl, yu, y) in sub_interval()) {
        let rows = mccormick_rows(Interval::new(xl, xu), Interval::new(yl, yu)).unwrap();
        for r in rows {
            prop_assert!(r.holds(x * y, x, y, 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn signed_area_is_antisymmetric_and_d4_covariant(p in point(), q in point(), r in point()) {
        let a = signed_area_of(p, q, r);
        prop_assert!((signed_area_of(q, p, r) + a).abs() <= 1e-15);
        prop_assert!((signed_area_of(q, r, p) - a).abs() <= 1e-15);
        for g in D4::ALL {
            let b = signed_area_of(g.apply(p), g.apply(q), g.apply(r));
            let s = if g.is_reflection() { -1.0 } else { 1.0 };
            prop_assert!((b - s * a).abs() <= 1e-14, "{:?}", g);
        }
    }

    #[test]
    fn min_area_is_d4_invariant(pts in proptest::collection::vec(point(), 3..9)) {
        let c = Configuration::new(pts).unwrap();
        let m = min_triangle_area(&c).0;
        for g in D4::ALL {
            prop_assert!((min_triangle_area(&apply_symmetry(&c, g)).0 - m).abs() <= 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn enclosures_contain_the_value_and_nest(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 2i64..60) {
        prop_assume!(heilbronn_core::exact::quad::is_squarefree(&d.into()));
        let q = QuadExt::new(d, rat(a, b), rat(c, b)).unwrap();
        let e = AlgebraicExpr::from_quad(&q);
        let coarse = interval_eval(&e, 40).unwrap();
        let fine = interval_eval(&e, 120).unwrap();
        prop_assert!(fine.is_subset_of(&coarse));
        let v = q.to_f64();
        prop_assert!(coarse.lo_f64() <= v + 1e-12 && v - 1e-12 <= coarse.hi_f64());
        // the square of the irrational part is rational and must be enclosed exactly
        let sq = AlgebraicExpr::Mul(vec![e.clone() - AlgebraicExpr::Rat(q.a.clone()), e - AlgebraicExpr::Rat(q.a.clone())]);
        let enc = interval_eval(&sq, 80).unwrap();
        prop_assert!(enc.contains(&(&q.b * &q.b * heilbronn_core::exact::Rational::from_integer(d.into()))));
    }

    #[test]
    fn fbbt_keeps_every_feasible_point(seed in any::<u64>(), n in 5usize..8, shrink in 0.0..1.0f64, final_model in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_start(n, &mut rng).unwrap();
        let model = if final_model { build_final(n, 0.5).unwrap() } else { build_baseline(n).unwrap() };
        let relax = Relaxation::new(&model);
        let mut nb = NodeBounds::root(&model);
        for i in 1..=n {
            for (k, v) in [(xc(i), c.x(i)), (yc(i), c.y(i))] {
                let iv = nb.coords[k];
                nb.coords[k] = Interval::new(iv.lo + shrink * (v - iv.lo), iv.hi - shrink * (iv.hi - v));
            }
        }
        let z = min_triangle_area(&c).0;
        nb.z = Interval::new(z, nb.z.hi);
        let out = relax.fbbt(&nb);
        prop_assert!(!out.infeasible);
        for i in 1..=n {
            prop_assert!(out.coords[xc(i)].contains(c.x(i)) && out.coords[yc(i)].contains(c.y(i)));
            for j in 1..=n {
                let w = out.w[product_index(n, i, j)];
                let v = c.x(i) * c.y(j);
                prop_assert!(w.lo <= v + 1e-12 && v - 1e-12 <= w.hi);
            }
        }
        for (t, tri) in relax.triangles.iter().enumerate() {
            let a = heilbronn_core::geometry::signed_area(&c, *tri).unwrap();
            let iv = out.area[t];
            prop_assert!(iv.lo - 1e-12 <= a && a <= iv.hi + 1e-12);
            let want = if a > 0.0 { BinDomain::One } else { BinDomain::Zero };
            prop_assert!(out.binary[t] == BinDomain::Both || out.binary[t] == want || a.abs() < 1e-12);
        }
        prop_assert!(out.z.contains(z) || (out.z.lo - z).abs() < 1e-12);
    }

    #[test]
    fn box_lp_matches_the_closed_form(c in proptest::collection::vec(-5.0..5.0f64, 1..8), seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lp = LinearProgram::new(Sense::Maximize);
        let mut want = 0.0;
        for &ck in &c {
            let lo: f64 = rng.random_range(-2.0..0.0);
            let hi: f64 = rng.random_range(0.0..2.0);
            lp.add_var(lo, hi, ck);
            want += (ck * lo).max(ck * hi);
        }
        let s = solve_lp(&lp).unwrap();
        prop_assert_eq!(s.status, LpStatus::Optimal);
        prop_assert!((s.objective - want).abs() <= 1e-9);
    }

    #[test]
    fn two_variable_lp_matches_vertex_enumeration(rows in proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64, 0.1..3.0f64), 1..6), cx in -2.0..2.0f64, cy in -2.0..2.0f64) {
        let mut lp = LinearProgram::new(Sense::Maximize);
        lp.add_var(-1.0, 1.0, cx);
        lp.add_var(-1.0, 1.0, cy);
        // every row is satisfied by the origin, so the LP is feasible
        let mut lines: Vec<(f64, f64, f64)> = vec![(1.0, 0.0, 1.0), (-1.0, 0.0, 1.0), (0.0, 1.0, 1.0), (0.0, -1.0, 1.0)];
        for &(a, b, r) in &rows {
            lp.add_row(vec![(0, a), (1, b)], Relation::Le, r);
            lines.push((a, b, r));
        }
        let mut best = f64::NEG_INFINITY;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1, r1) = lines[i];
                let (a2, b2, r2) = lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.abs() < 1e-9 {
                    continue;
                }
                let x = (r1 * b2 - r2 * b1) / det;
                let y = (a1 * r2 - a2 * r1) / det;
                if lines.iter().all(|&(a, b, r)| a * x + b * y <= r + 1e-9) {
                    best = best.max(cx * x + cy * y);
                }
            }
        }
        let s = solve_lp(&lp).unwrap();
        prop_assert_eq!(s.status, LpStatus::Optimal);
        prop_assert!((s.objective - best).abs() <= 1e-7, "{} vs {}", s.objective, best);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn polish_never_decreases_the_minimum(seed in any::<u64>(), n in 3usize..10, steps in 1usize..6) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = random_start(n, &mut rng).unwrap();
        let mut m = min_triangle_area(&c).0;
        for _ in 0..steps {
            let i = rng.random_range(1..=n);
            c = polish_point(&c, i).unwrap();
            let m2 = min_triangle_area(&c).0;
            prop_assert!(m2 >= m);
            m = m2;
        }
    }
}

#[test]
fn bnb_sandwich_and_determinism_on_five_points() {
    let model = build_final(5, 0.5).unwrap();
    let delta5 = 3f64.sqrt() / 9.0;
    for limit in [1u64, 4, 16, 64] {
        let p = SearchParams {
            node_limit: Some(limit),
            ..Default::default()
        };
        let a = solve(&model, &p, None).unwrap();
        let b = solve(&model, &p, None).unwrap();
        assert!(a.z_lb <= delta5 + 1e-9 && delta5 <= a.z_ub + 1e-9, "limit {limit}");
        assert_eq!((a.nodes, a.z_lb, a.z_ub, &a.incumbent), (b.nodes, b.z_lb, b.z_ub, &b.incumbent));
        let strip = |c: &heilbronn_core::bnb::BnBCertificate| c.trace.iter().map(|t| (t.nodes, t.z_lb, t.z_ub)).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
    }
}
