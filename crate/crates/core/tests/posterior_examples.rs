use approx::assert_abs_diff_eq;
use gibbs_info::engine::{
    gibbs_posterior, individual_measures, joint_measures, limiting_posterior, verify_theorem1,
    TypeClass,
};
use gibbs_info::{DiscreteProblem, GibbsParams, ProblemSpec};

fn params(gamma: f64, n: usize) -> GibbsParams {
    GibbsParams::new(gamma, n).unwrap()
}

fn constant_loss(c: f64) -> DiscreteProblem {
    DiscreteProblem::new(ProblemSpec {
        hypotheses: vec!["a".into(), "b".into(), "c".into()],
        instances: vec!["x".into(), "y".into()],
        loss: vec![vec![c; 2]; 3],
        prior: vec![0.2, 0.3, 0.5],
        mu: vec![0.4, 0.6],
    })
    .unwrap()
}

fn point_mass() -> DiscreteProblem {
    DiscreteProblem::new(ProblemSpec {
        hypotheses: vec!["0".into(), "1".into()],
        instances: vec!["0".into(), "1".into()],
        loss: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        prior: vec![0.5, 0.5],
        mu: vec![1.0, 0.0],
    })
    .unwrap()
}

#[test]
fn single_toss_softmax() {
    let p = DiscreteProblem::coin_toss(0.5).unwrap();
    let post = gibbs_posterior(&p, params(1.0, 1), &TypeClass::from_counts(vec![1, 0])).unwrap();
    assert_abs_diff_eq!(post.values()[0], 0.26894, epsilon = 1e-5);
    assert_abs_diff_eq!(post.values()[1], 0.73106, epsilon = 1e-5);
}

#[test]
fn zero_gamma_and_constant_loss_return_prior() {
    let p = DiscreteProblem::random(4, 3, 2).unwrap();
    let t = TypeClass::from_counts(vec![3, 2]);
    let post = gibbs_posterior(&p, params(0.0, 5), &t).unwrap();
    for (a, b) in post.values().iter().zip(p.prior().values()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
    }
    let c = constant_loss(0.7);
    for gamma in [0.5, 3.0, 40.0] {
        let post = gibbs_posterior(&c, params(gamma, 5), &TypeClass::from_counts(vec![1, 4])).unwrap();
        for (a, b) in post.values().iter().zip(c.prior().values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }
}

#[test]
fn limiting_posterior_cases() {
    let p = DiscreteProblem::random(4, 3, 2).unwrap();
    let lim = limiting_posterior(&p, 0.0).unwrap();
    for (a, b) in lim.dist.values().iter().zip(p.prior().values()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
    }
    let coin = DiscreteProblem::coin_toss(0.5).unwrap();
    for gamma in [0.1, 1.0, 10.0] {
        let lim = limiting_posterior(&coin, gamma).unwrap();
        assert_abs_diff_eq!(lim.dist.values()[0], 0.5, epsilon = 1e-15);
    }
    // point mass on instance 0: hypothesis 1 never loses
    let pm = point_mass();
    let mut last = 0.0;
    for gamma in [0.5, 1.0, 2.0, 5.0, 20.0, 80.0] {
        let mass = limiting_posterior(&pm, gamma).unwrap().dist.values()[1];
        assert!(mass > last);
        last = mass;
    }
    assert!(last > 1.0 - 1e-12);
}

#[test]
fn single_hypothesis_carries_no_information() {
    let p = DiscreteProblem::random(3, 1, 3).unwrap();
    for n in [1, 4, 9] {
        let r = joint_measures(&p, params(2.0, n)).unwrap();
        assert_eq!((r.mutual, r.lautum, r.skl, r.chi2), (0.0, 0.0, 0.0, 0.0));
        assert!(r.gen.abs() < 1e-15);
    }
}

#[test]
fn single_sample_individual_equals_joint() {
    let p = DiscreteProblem::random(8, 4, 3).unwrap();
    let a = joint_measures(&p, params(1.5, 1)).unwrap();
    let b = individual_measures(&p, params(1.5, 1)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn coin_toss_individual_rate_at_64() {
    let p = DiscreteProblem::coin_toss(0.5).unwrap();
    let r = individual_measures(&p, params(1.0, 64)).unwrap();
    assert!((64.0 * 64.0 * r.skl / 0.25 - 1.0).abs() < 0.05);
}

#[test]
fn gap_identity_fixtures() {
    let coin = DiscreteProblem::coin_toss(0.5).unwrap();
    assert!(verify_theorem1(&coin, params(1.0, 6)).unwrap() <= 1e-10);
    for seed in 0..100 {
        let p = DiscreteProblem::random(seed, 3, 3).unwrap();
        assert!(verify_theorem1(&p, params(2.0, 5)).unwrap() <= 1e-10);
    }
}
