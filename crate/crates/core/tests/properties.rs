mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use kms_graph_lab::classify::{classify, ClassifyOptions};
use kms_graph_lab::conformal::{state_check, StateVerdict};
use kms_graph_lab::eigen::{arms_floor, arms_solution, ladder_closed_form, solve_finite, verify, VertexPotential};
use kms_graph_lab::graph::{FiniteGraph, GraphFamily, VertexId};
use kms_graph_lab::lattice::LatticeWalk;
use kms_graph_lab::periods::{d_g_of, d_prime_search, factor_type, periods, FactorType, PeriodOptions};
use kms_graph_lab::report::Report;
use kms_graph_lab::spectral::{arms_alpha, beta0, Beta0Options};
use kms_graph_lab::structure::recode;
use proptest::prelude::*;

use common::Matrix;

/// Strongly connected by construction: a cycle through a permutation plus
/// extra edges. With `period > 1` every edge goes from class `i` to class
/// `i + 1 mod period`, which keeps the period a multiple of `period`.
fn matrix(max_n: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_n, 1usize..=3, any::<u64>()).prop_map(|(n, period, seed)| {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let mut rng = common::rng(seed);
        let period = if n % period == 0 { period } else { 1 };
        let class = |v: usize| v % period;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        if period > 1 {
            // sort so the cycle walks through the classes in order
            order.sort_by_key(|&v| (v / period, class(v)));
        }
        let mut a = vec![vec![0u64; n]; n];
        for i in 0..n {
            a[order[i]][order[(i + 1) % n]] += 1;
        }
        for v in 0..n {
            for w in 0..n {
                if class(w) == (class(v) + 1) % period && rng.random_bool(0.25) {
                    a[v][w] += rng.random_range(0..=1);
                }
            }
        }
        a
    })
}

fn edge_ends(g: &FiniteGraph, ids: &[kms_graph_lab::graph::EdgeId]) -> Option<(usize, usize)> {
    let idx: Vec<usize> = ids.iter().map(|e| g.edge_index_of(e)).collect::<Option<_>>()?;
    for w in idx.windows(2) {
        if g.edge(w[0]).dst != g.edge(w[1]).src {
            return None;
        }
    }
    Some((g.edge(*idx.first()?).src, g.edge(*idx.last()?).dst))
}

fn closure(a: &Matrix, v: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([v]);
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for w in 0..a.len() {
            if a[u][w] > 0 && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}

/// `reach[l][w]`: some walk of length `l` goes from `s` to `w`.
fn walk_layers(a: &Matrix, s: usize, max_len: usize) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut out = vec![(0..n).map(|w| w == s).collect::<Vec<_>>()];
    for l in 0..max_len {
        let next = (0..n).map(|w| (0..n).any(|u| out[l][u] && a[u][w] > 0)).collect();
        out.push(next);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_g_matches_closed_walks_and_differences(a in matrix(8)) {
        let g = common::to_graph(&a);
        let n = a.len();
        let closed = (0..n)
            .flat_map(|v| common::closed_walk_lengths(&a, v, 2 * n))
            .fold(0u64, |acc, l| common::gcd(acc, l as u64));
        let mut diffs = 0u64;
        for v in 0..n {
            let layers = walk_layers(&a, v, 2 * n);
            for w in 0..n {
                let lens: Vec<usize> = (0..=2 * n).filter(|&l| layers[l][w]).collect();
                for x in &lens {
                    diffs = common::gcd(diffs, (x - lens[0]) as u64);
                }
            }
        }
        let d = d_g_of(&g, None);
        prop_assert_eq!(d, closed);
        prop_assert_eq!(d, diffs);
    }

    #[test]
    fn certified_differences_hold_for_every_path(a in matrix(6)) {
        let g = common::to_graph(&a);
        let search = d_prime_search(&g, 4, 6, 0).unwrap();
        for c in &search.certified {
            let seed = g.require(&c.hereditary_seed[0]).unwrap();
            for s in closure(&a, seed) {
                let layers = walk_layers(&a, s, c.m.max(c.l));
                for r in (0..a.len()).filter(|&r| layers[c.m][r]) {
                    let ok = (0..=c.l).any(|b| {
                        let top = b + c.d as usize;
                        top <= c.l && layers[b][r] && layers[top][r]
                    });
                    prop_assert!(ok, "d = {} fails for {} -> {}", c.d, s, r);
                }
            }
            for w in &c.witnesses {
                let mu = edge_ends(&g, &w.mu).unwrap();
                prop_assert_eq!(edge_ends(&g, &w.longer).unwrap_or(mu), mu);
                prop_assert_eq!(edge_ends(&g, &w.shorter).unwrap_or(mu), mu);
                prop_assert_eq!(w.longer.len() - w.shorter.len(), c.d as usize);
                prop_assert!(w.longer.len() <= c.l);
            }
        }
        // certified values lie in ℤd_G
        let d = d_g_of(&g, None);
        prop_assert!(search.gcd == 0 || search.gcd.is_multiple_of(d));
    }

    #[test]
    fn perron_solution_and_state(a in matrix(8)) {
        let g = Arc::new(common::to_graph(&a));
        let s = solve_finite(&g, &VertexPotential::gauge(), None).unwrap();
        prop_assert!(s.xi.iter().all(|&x| x > 0.0));
        prop_assert!(verify(&g, s.beta, &s.potential, &s.xi).unwrap().pass);
        let family = GraphFamily::Explicit(g.clone());
        let st = state_check(&family, &s, &[1]).unwrap();
        prop_assert_eq!(st.verdict, StateVerdict::StateWithNormalization);
        let total: f64 = st.normalized.unwrap().values().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_potential_rescales_beta(a in matrix(6), c in 0.2f64..5.0) {
        let g = common::to_graph(&a);
        let b = solve_finite(&g, &VertexPotential::gauge(), None).unwrap().beta;
        let s = solve_finite(&g, &VertexPotential::constant(c), None).unwrap();
        prop_assert!((s.beta - b / c).abs() < 1e-9 * (1.0 + b.abs()));
    }

    #[test]
    fn positive_potential_solutions_verify(a in matrix(6), vals in proptest::collection::vec(0.3f64..3.0, 6)) {
        let g = common::to_graph(&a);
        let f0 = VertexPotential {
            default: 1.0,
            overrides: (0..a.len()).map(|v| (VertexId::from(format!("v{v}")), vals[v])).collect(),
        };
        let s = solve_finite(&g, &f0, None).unwrap();
        let r = verify(&g, s.beta, &f0, &s.xi).unwrap();
        prop_assert!(r.max_residual < 1e-8, "residual {}", r.max_residual);
    }

    #[test]
    fn recoding_keeps_beta0(a in matrix(5), k in 1usize..=3) {
        let g = common::to_graph(&a);
        let h = recode(&g, k).unwrap();
        let paths: usize = (0..g.vertex_count()).map(|v| g.enumerate_paths(v, k).len()).sum();
        prop_assert_eq!(h.vertex_count(), paths);
        let opts = Beta0Options::default();
        let b = beta0(&GraphFamily::Explicit(Arc::new(g)), &opts).unwrap().value;
        let c = beta0(&GraphFamily::Explicit(Arc::new(h)), &opts).unwrap().value;
        prop_assert!((b - c).abs() < 1e-10);
    }

    #[test]
    fn report_round_trip(a in matrix(5)) {
        let family = GraphFamily::Explicit(Arc::new(common::to_graph(&a)));
        let mut r = Report::new("classify", family.describe());
        r.insert("classification", classify(&family, &ClassifyOptions::default()).unwrap()).unwrap();
        let text = r.to_json();
        prop_assert_eq!(Report::from_json(&text).unwrap().to_json(), text);
    }

    #[test]
    fn arms_closed_form_verifies(arms in 1usize..=4, lift in 0.0f64..2.0, split in proptest::collection::vec(0.0f64..1.0, 4)) {
        let beta = arms_alpha(arms).ln() + lift;
        let slack = beta.exp() - arms as f64 * arms_floor(beta);
        let total: f64 = split[..arms].iter().sum::<f64>().max(1e-9);
        let excess: Vec<f64> = split[..arms].iter().map(|s| slack * s / total).collect();
        let g = Arc::new(GraphFamily::arms(arms).unwrap().truncation(12).unwrap());
        let s = arms_solution(g, beta, &excess).unwrap();
        prop_assert!(s.residual < 1e-10, "residual {}", s.residual);
        prop_assert!(s.xi.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn ladder_closed_form_verifies(beta in -3.0f64..3.0) {
        let g = GraphFamily::Ladder.truncation(20).unwrap();
        let xi: Vec<f64> = g.vertices().iter().map(|v| ladder_closed_form(v, beta).unwrap()).collect();
        let r = verify(&g, beta, &VertexPotential::gauge(), &xi).unwrap();
        prop_assert!(r.pass, "max residual {}", r.max_residual);
    }

    #[test]
    fn mgf_minimum_is_global(up in 1u64..4, down in 1u64..4, c in -3.0f64..3.0) {
        let walk = LatticeWalk::new(1, vec![(vec![1], up), (vec![-1], down)]).unwrap();
        let sol = walk.minimize_mgf(1e-12).unwrap();
        prop_assert!(sol.beta0 <= walk.beta_for(&[c]) + 1e-12);
        let oracle = 0.5 * (down as f64 / up as f64).ln();
        prop_assert!((sol.c_min[0] - oracle).abs() < 1e-9);
    }

    #[test]
    fn factor_lambda_in_unit_interval(beta in -4.0f64..4.0) {
        let p = periods(&GraphFamily::Ladder, &PeriodOptions::default()).unwrap();
        match factor_type(&p, beta) {
            FactorType::IiiLambda { lambda, .. } => prop_assert!(lambda > 0.0 && lambda < 1.0),
            FactorType::IiInfinity => prop_assert_eq!(beta, 0.0),
            FactorType::Inconclusive { .. } => prop_assert!(false),
        }
    }
}
