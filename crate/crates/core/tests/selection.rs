mod common;

use common::{instance_rng, problem};
use isac_core::selection::{best_candidate, build_linkage_tree, exhaustive_select, select_group};
use isac_core::transmit::GramSet;
use rand::Rng;

#[test]
fn tree_between_exhaustive_and_best_singleton() {
    let mut compared = 0;
    for i in 0..50u32 {
        let mut rng = instance_rng(41, i);
        let k = rng.random_range(4..=8);
        let p = problem(k, 0.2, 41, i);
        let q = GramSet::uniform(k, p.cfg.n_t, p.cfg.p_t);
        let tree = build_linkage_tree(&p.layout.p, &p.layout.p_0, p.cfg.rho);
        assert!(tree.evaluations <= k * k * k, "K = {k}: {} evaluations", tree.evaluations);
        assert_eq!(tree.groups.len(), 2 * k - 1);
        let singles: Vec<Vec<usize>> = (0..k).map(|j| vec![j]).collect();
        let (Ok(h), Ok(ex), Ok(one)) = (
            select_group(&tree, &q, &p),
            exhaustive_select(&p, &q),
            best_candidate(&p, &q, &singles),
        ) else {
            continue;
        };
        assert!(h.crb >= ex.crb, "instance {i}: heuristic {} beats exhaustive {}", h.crb, ex.crb);
        assert!(h.crb <= one.crb, "instance {i}: heuristic {} loses to singleton {}", h.crb, one.crb);
        compared += 1;
    }
    assert!(compared >= 40, "{compared} feasible instances");
}
