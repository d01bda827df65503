use mdst_core::model::norm_decomposition_gap;
use mdst_core::sampling::{derive_seed, open_unit, stream};
use mdst_core::*;
use proptest::prelude::*;

fn random_sample(d: usize, n: usize, seed: u64) -> PointSample {
    let mut rng = stream(seed);
    let coords: Vec<f64> = (0..n * d).map(|_| open_unit(&mut rng)).collect();
    PointSample::from_flat(d, coords, n as f64, seed).unwrap()
}

/// Points on a coarse grid, so coordinate ties are common.
fn grid_sample(d: usize, cells: &[u8]) -> PointSample {
    let mut rows: Vec<Vec<f64>> = cells
        .chunks_exact(d)
        .map(|c| c.iter().map(|&v| f64::from(v % 5) / 4.0).collect::<Vec<_>>())
        .filter(|p| p.iter().any(|&c| c > 0.0))
        .collect();
    rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
    rows.dedup();
    PointSample::from_flat(d, rows.concat(), 1.0, 0).unwrap()
}

fn exhaustive_minimum(sample: &PointSample) -> f64 {
    let n = sample.len();
    let options: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let x = sample.point(i);
            let mut lens = vec![x.iter().map(|c| c * c).sum::<f64>().sqrt()];
            for j in 0..n {
                let y = sample.point(j);
                if dominates(x, y).unwrap() {
                    lens.push(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt());
                }
            }
            lens
        })
        .collect();
    fn walk(options: &[Vec<f64>], i: usize, acc: f64, best: &mut f64) {
        if i == options.len() {
            *best = best.min(acc);
            return;
        }
        for &l in &options[i] {
            walk(options, i + 1, acc + l, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(&options, 0, 0.0, &mut best);
    best
}

#[test]
fn mdst_matches_exhaustive_enumeration() {
    for case in 0..500u64 {
        let d = 2 + (case % 2) as usize;
        let n = 1 + (case % 8) as usize;
        let sample = random_sample(d, n, derive_seed(17, case));
        let tree = build_mdst(&sample);
        let best = exhaustive_minimum(&sample);
        assert!((tree.total_length() - best).abs() <= 1e-12 * best, "case {case}");
    }
}

#[test]
fn mdst_spec_examples() {
    let one = PointSample::from_flat(2, vec![0.3, 0.4], 1.0, 0).unwrap();
    let t = build_mdst(&one);
    assert_eq!(t.parent, vec![Parent::Root]);
    assert!((t.edge_length[0] - 0.5).abs() < 1e-15);
    let two = PointSample::from_flat(2, vec![0.2, 0.2, 0.9, 0.9], 1.0, 0).unwrap();
    let t = build_mdst(&two);
    assert_eq!(t.parent, vec![Parent::Root, Parent::Vertex(0)]);
    assert!((t.edge_length[1] - 0.989_949_493_661_166_5).abs() < 1e-12);
    assert!(PointSample::from_flat(2, vec![0.2, 0.2, 0.2, 0.2], 1.0, 0).is_err());
}

#[test]
fn fast_minima_on_uniform_samples() {
    for d in 2..=4 {
        for case in 0..1000u64 {
            let n = 1 + (derive_seed(case, d as u64) % 500) as usize;
            let s = random_sample(d, n, derive_seed(case, 100 + d as u64));
            assert_eq!(minimal_points_fast(&s), minimal_points_naive(&s), "d {d} case {case}");
        }
    }
}

#[test]
fn norm_decomposition_examples() {
    assert_eq!(norm_decomposition_gap(&[0.7, 0.0, 0.0], 1.5), (0.0, 0.0));
    let (l, r) = norm_decomposition_gap(&[1.0, 1.0], 2.0);
    assert!(l.abs() < 1e-15 && (r - 2.0).abs() < 1e-15);
    let (l, r) = norm_decomposition_gap(&[1.0, 1.0], 1.0);
    assert!((l - (2.0 - 2f64.sqrt())).abs() < 1e-15 && (r - 2.0).abs() < 1e-15);
}

#[test]
fn norm_decomposition_constant_calibrates() {
    let n = 1_000_000;
    for &d in &[2usize, 3, 4] {
        for &alpha in &[0.5, 1.0, 2.0, 3.7] {
            let ratio_max = |seed: u64| {
                let mut rng = stream(seed);
                let mut x = vec![0.0; d];
                let mut worst = 0.0f64;
                for _ in 0..n {
                    x.iter_mut().for_each(|c| *c = open_unit(&mut rng));
                    let (lhs, rhs) = norm_decomposition_gap(&x, alpha);
                    if rhs > 0.0 && lhs > 1e-14 {
                        worst = worst.max(lhs / rhs);
                    }
                }
                worst
            };
            let c = ratio_max(derive_seed(d as u64, alpha.to_bits()));
            assert!(c.is_finite() && (c > 0.0 || alpha == 2.0));
            let mut rng = stream(derive_seed(99 + d as u64, alpha.to_bits()));
            let mut x = vec![0.0; d];
            for _ in 0..n {
                x.iter_mut().for_each(|v| *v = open_unit(&mut rng));
                let (lhs, rhs) = norm_decomposition_gap(&x, alpha);
                // At alpha = 2 both sides of the identity agree exactly and
                // the left side is pure rounding.
                assert!(lhs <= 1.05 * c * rhs + 1e-14, "d {d} alpha {alpha}: {x:?}");
            }
        }
    }
}

#[test]
fn statistic_with_equal_norms() {
    // Points on the quarter circle of radius 0.8 are pairwise incomparable.
    let r: f64 = 0.8;
    let coords: Vec<f64> = (1..10)
        .flat_map(|i| {
            let t = i as f64 * std::f64::consts::FRAC_PI_2 / 10.0;
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    let s = PointSample::from_flat(2, coords, 1.0, 0).unwrap();
    for alpha in [0.5, 1.0, 3.0] {
        let l = rooted_alpha_length(&s, alpha).unwrap();
        assert!((l - 9.0 * r.powf(alpha)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fast_equals_naive_large(d in 1usize..=6, n in 0usize..10_000, seed in any::<u64>()) {
        let s = random_sample(d, n, seed);
        prop_assert_eq!(minimal_points_fast(&s), minimal_points_naive(&s));
    }
}

proptest! {
    #[test]
    fn fast_equals_naive_with_ties(d in 1usize..=5, cells in prop::collection::vec(any::<u8>(), 0..400)) {
        let s = grid_sample(d, &cells[..cells.len() / d * d]);
        prop_assert_eq!(minimal_points_fast(&s), minimal_points_naive(&s));
        let t = build_mdst(&s);
        prop_assert_eq!(&t.minimal_indices, &minimal_points_naive(&s));
    }

    #[test]
    fn tree_edges_descend_and_terminate(d in 2usize..=4, n in 1usize..300, seed in any::<u64>()) {
        let s = random_sample(d, n, seed);
        let t = build_mdst(&s);
        for (i, p) in t.parent.iter().enumerate() {
            if let Parent::Vertex(j) = *p {
                prop_assert!(dominates(s.point(i), s.point(j)).unwrap());
            }
            prop_assert!(t.depth(i).is_some());
        }
        prop_assert_eq!(&t.minimal_indices, &minimal_points_fast(&s));
        let direct = rooted_alpha_length(&s, 1.0).unwrap();
        let from_tree: f64 = t.minimal_indices.iter().map(|&i| t.edge_length[i]).sum();
        prop_assert!((direct - from_tree).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn adding_points_changes_the_statistic_as_expected(n in 1usize..200, seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let s = random_sample(3, n, seed);
        let minimal = minimal_points_fast(&s);
        let base = rooted_alpha_length(&s, 1.5).unwrap();
        // A point strictly above an existing minimal point changes nothing.
        let m = s.point(minimal[pick.index(minimal.len())]);
        let above: Vec<f64> = m.iter().map(|c| c + (1.0 - c) * 0.5).collect();
        let mut coords = s.flat_coords().to_vec();
        coords.extend_from_slice(&above);
        let bigger = PointSample::from_flat(3, coords, 1.0, 0).unwrap();
        prop_assert_eq!(minimal_points_fast(&bigger).len(), minimal.len());
        prop_assert!((rooted_alpha_length(&bigger, 1.5).unwrap() - base).abs() <= 1e-12 * base);
        // A point below the smallest coordinates of every point dominates
        // nothing and is dominated by nothing when it sits on an axis edge.
        let lo: Vec<f64> = (0..3).map(|k| s.points().map(|p| p[k]).fold(1.0, f64::min) * 0.5).collect();
        let fresh = [lo[0], 1.0, 1.0];
        let dominated_by_fresh = s.points().any(|p| dominates(&fresh, p).unwrap());
        let dominating_fresh = s.points().any(|p| dominates(p, &fresh).unwrap());
        if !dominated_by_fresh && !dominating_fresh {
            let mut coords = s.flat_coords().to_vec();
            coords.extend_from_slice(&fresh);
            let bigger = PointSample::from_flat(3, coords, 1.0, 0).unwrap();
            let own = (fresh.iter().map(|c| c * c).sum::<f64>()).powf(0.75);
            prop_assert!((rooted_alpha_length(&bigger, 1.5).unwrap() - base - own).abs() <= 1e-12 * (base + own));
        }
    }
}
