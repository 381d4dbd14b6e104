//! Property tests over randomized geometry and fuzzy instances. Structured
//! inputs are built through the crate's instance generators from
//! proptest-supplied seeds, which keeps shrinking meaningful (a failing
//! seed reproduces the exact instance).

use std::sync::Arc;

use fsbm::fuzzy::AlphaGrid;
use fsbm::geometry::{make_direction_grid, ConvexBody, DirectionGrid};
use fsbm::instances;
use fsbm::randomsets::find_separator;
use fsbm::rng::task_rng;
use proptest::prelude::*;

fn grid() -> Arc<DirectionGrid> {
    make_direction_grid(2, 32, 11).unwrap()
}

fn alpha() -> Arc<AlphaGrid> {
    AlphaGrid::uniform(4).unwrap()
}

proptest! {
    /// Support additivity holds for every direction of every random pair.
    #[test]
    fn prop_minkowski_support_additivity(seed in any::<u64>()) {
        let g = grid();
        let mut rng = task_rng(seed);
        let a = instances::random_polytope(&g, &mut rng, 8, 2.0);
        let b = instances::random_polytope(&g, &mut rng, 8, 2.0);
        let sum = a.minkowski_sum(&b).unwrap();
        for i in 0..g.len() {
            let expect = a.support_values()[i] + b.support_values()[i];
            prop_assert!((sum.support_values()[i] - expect).abs() <= 1e-12);
        }
    }

    /// The grid Hausdorff pseudo-metric is symmetric and satisfies the
    /// triangle inequality.
    #[test]
    fn prop_hausdorff_metric_axioms(seed in any::<u64>()) {
        let g = grid();
        let mut rng = task_rng(seed);
        let a = instances::random_polytope(&g, &mut rng, 8, 2.0);
        let b = instances::random_polytope(&g, &mut rng, 8, 2.0);
        let c = instances::random_polytope(&g, &mut rng, 8, 2.0);
        let dab = a.hausdorff(&b).unwrap();
        prop_assert_eq!(dab, b.hausdorff(&a).unwrap());
        prop_assert!(a.hausdorff(&c).unwrap() <= dab + b.hausdorff(&c).unwrap() + 1e-12);
        prop_assert_eq!(a.hausdorff(&a).unwrap(), 0.0);
    }

    /// Scaling composes multiplicatively for nonnegative factors and the
    /// grid value never exceeds the exact polygon distance.
    #[test]
    fn prop_scale_composition_and_oracle_bound(
        seed in any::<u64>(),
        r in 0.0f64..2.0,
        s in 0.0f64..2.0,
    ) {
        let g = grid();
        let mut rng = task_rng(seed);
        let a = instances::random_polytope(&g, &mut rng, 8, 2.0);
        let b = instances::random_polytope(&g, &mut rng, 8, 2.0);
        let twice = a.scale(r).scale(s);
        let once = a.scale(r * s);
        for i in 0..g.len() {
            prop_assert!((twice.support_values()[i] - once.support_values()[i]).abs() <= 1e-12);
        }
        let exact = fsbm::geometry::hausdorff_exact_polygon(&a, &b).unwrap();
        prop_assert!(a.hausdorff(&b).unwrap() <= exact + 1e-12);
    }

    /// d∞ equals the sup-norm of the embedded difference, exactly, and
    /// fuzzy arithmetic preserves nestedness.
    #[test]
    fn prop_embedding_isometry_and_nestedness(seed in any::<u64>()) {
        let g = grid();
        let al = alpha();
        let mut rng = task_rng(seed);
        let nu1 = instances::random_fuzzy_set(&g, &al, &mut rng);
        let nu2 = instances::random_fuzzy_set(&g, &al, &mut rng);
        let d = nu1.d_infinity(&nu2).unwrap();
        let sup = nu1.embed().sub(&nu2.embed()).unwrap().sup_norm();
        prop_assert_eq!(d, sup);
        prop_assert!(nu1.fuzzy_sum(&nu2).unwrap().is_nested());
        prop_assert!(nu1.fuzzy_scale(-1.5).is_nested());
        prop_assert!(nu1.embed().is_alpha_monotone());
    }

    /// Grid-level inclusion is preserved by Minkowski sums: if B ⊆ A then
    /// B ⊕ C ⊆ A ⊕ C.
    #[test]
    fn prop_containment_respects_sums(seed in any::<u64>(), shrink in 0.0f64..1.0) {
        let g = grid();
        let mut rng = task_rng(seed);
        let a = instances::random_polytope_with_zero(&g, &mut rng, 8, 2.0);
        let b = a.scale(shrink);
        let c = instances::random_polytope(&g, &mut rng, 8, 2.0);
        prop_assert!(a.contains(&b).unwrap());
        let ac = a.minkowski_sum(&c).unwrap();
        let bc = b.minkowski_sum(&c).unwrap();
        prop_assert!(ac.contains(&bc).unwrap());
    }

    /// Any two selections differing on a positive-weight atom are
    /// separated by the family or its negations.
    #[test]
    fn prop_separator_completeness(seed in any::<u64>()) {
        let mut rng = task_rng(seed);
        let (space, x1, x2) = instances::random_distinct_selection_pair(&mut rng, 2, 6);
        let found = find_separator(&x1, &x2, &space).unwrap().is_some()
            || find_separator(&x2, &x1, &space).unwrap().is_some();
        prop_assert!(found);
    }

    /// Body serialization round-trips through JSON without changing any
    /// support value or vertex.
    #[test]
    fn prop_body_json_round_trip(seed in any::<u64>()) {
        let g = grid();
        let mut rng = task_rng(seed);
        let a = instances::random_polytope(&g, &mut rng, 8, 2.0);
        let text = serde_json::to_string(&a.to_json()).unwrap();
        let parsed: fsbm::geometry::BodyJson = serde_json::from_str(&text).unwrap();
        let back = ConvexBody::from_json(&parsed, &g).unwrap();
        prop_assert_eq!(back.support_values(), a.support_values());
        prop_assert_eq!(back.vertices(), a.vertices());
    }
}
