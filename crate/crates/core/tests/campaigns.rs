use opbell_core::checks::{
    check_bellman_classic, check_geometric_chain, check_jensen_vector, check_map_jensen,
    check_prop_concave, check_additive_corollary, CheckOptions, FailureClass, Instance,
};
use opbell_core::harness::{replay, run_campaign, CampaignConfig, RSpec, VStrategy};
use opbell_core::maps::{MapSpec, PositiveMap};
use opbell_core::matcore::{spectral_decompose, Relation, SymMatrix};
use opbell_core::random::random_symmetric_in;
use opbell_core::{CheckId, IntervalBounds, ScalarFunction, Verdict, Weight};

fn campaign(check: CheckId, trials: usize, m: f64, big_m: f64) -> CampaignConfig {
    CampaignConfig {
        trials,
        m,
        big_m,
        ..CampaignConfig::new(check)
    }
}

fn assert_clean(cfg: &CampaignConfig) {
    let rep = run_campaign(cfg).unwrap();
    assert_eq!(rep.counts.total(), cfg.trials);
    assert_eq!(
        rep.counts.violated, 0,
        "{} violated; worst {:?}",
        cfg.check,
        rep.worst_gap.map(|w| w.min_eig_gap)
    );
    assert_eq!(rep.counts.hypothesis_unmet, 0, "{}", cfg.check);
}

fn with(cfg: CampaignConfig, f: impl FnOnce(&mut CampaignConfig)) -> CampaignConfig {
    let mut c = cfg;
    f(&mut c);
    c
}

fn inst(a: SymMatrix, b: SymMatrix, v: f64) -> Instance {
    let n = a.n();
    Instance {
        a,
        b,
        v: Weight::new(v).unwrap(),
        r: None,
        f: None,
        map: PositiveMap::identity(n).unwrap(),
        bounds: None,
        seed: None,
    }
}

#[test]
fn classic_bellman_campaign() {
    assert_clean(&campaign(CheckId::BellmanClassic, 300, 0.0, 0.95));
}

#[test]
fn classic_collapses() {
    let a = random_symmetric_in(3, 0.0, 0.9, 5).unwrap();
    let mut i = inst(a.clone(), a, 0.4);
    i.r = Some(0.6);
    let rep = check_bellman_classic(&i, &CheckOptions::default()).unwrap();
    assert_eq!(rep.links[0].relation, Relation::Equal);
    let mut i = inst(
        random_symmetric_in(3, 0.0, 0.9, 6).unwrap(),
        random_symmetric_in(3, 0.0, 0.9, 7).unwrap(),
        0.7,
    );
    i.r = Some(1.0);
    let rep = check_bellman_classic(&i, &CheckOptions::default()).unwrap();
    assert_eq!(rep.links[0].relation, Relation::Equal);
}

#[test]
fn reversed_bellman_campaigns() {
    let base = campaign(CheckId::BellmanReversed, 200, 0.0, 0.95);
    assert_clean(&with(base.clone(), |c| {
        c.r = Some(RSpec::value(2.0));
        c.maps = vec![MapSpec::Pinching { blocks: None }];
    }));
    assert_clean(&with(base.clone(), |c| {
        c.m = 0.1;
        c.big_m = 0.9;
        c.r = Some(RSpec::value(-0.5));
        c.maps = vec![MapSpec::VectorState { seed: None }];
    }));
    assert_clean(&base);
}

#[test]
fn geometric_chain_campaign_and_collapses() {
    assert_clean(&with(campaign(CheckId::GeometricChain, 200, 0.05, 0.9), |c| {
        c.r = Some(RSpec::value(-1.0));
    }));
    let a = random_symmetric_in(3, 0.05, 0.9, 11).unwrap();
    let b = random_symmetric_in(3, 0.05, 0.9, 12).unwrap();
    for (x, y, v) in [(a.clone(), a.clone(), 0.3), (a, b, 0.0)] {
        let mut i = inst(x, y, v);
        i.r = Some(-0.6);
        let rep = check_geometric_chain(&i, &CheckOptions::default()).unwrap();
        assert!(rep.links.iter().all(|l| l.relation == Relation::Equal), "{rep:?}");
    }
}

#[test]
fn jensen_vector_cases() {
    let opts = CheckOptions::default();
    let a = random_symmetric_in(4, 0.1, 2.0, 3).unwrap();
    let d = spectral_decompose(&a).unwrap();
    let f = ScalarFunction::Power { p: 0.5 };
    let rep = check_jensen_vector(&a, &f, &d.eigenvector(2), &opts).unwrap();
    assert_eq!(rep.links[0].relation, Relation::Equal);
    let aff = ScalarFunction::Affine { a: -1.5, b: 4.0 };
    let u = [0.5, 0.5, 0.5, 0.5];
    let rep = check_jensen_vector(&a, &aff, &u, &opts).unwrap();
    assert_eq!(rep.links[0].relation, Relation::Equal);
    assert_clean(&campaign(CheckId::JensenVector, 300, 0.05, 3.0));
}

#[test]
fn map_jensen_left_link_holds_right_link_fails_for_strict_concavity() {
    // K = 1 for every concave positive f, so the right link reads
    // f(Φ(A)) ≤ Φ(f(A)), the reverse of Jensen's inequality.
    let cfg = with(campaign(CheckId::MapJensen, 100, 0.1, 0.9), |c| {
        c.maps = vec![MapSpec::Trace];
    });
    let rep = run_campaign(&cfg).unwrap();
    assert_eq!(rep.counts.violated, 100);
    for t in &rep.violations {
        assert!(t.report.link("lower").unwrap().holds);
        assert!(!t.report.link("upper").unwrap().holds);
        assert_eq!(t.report.failure, Some(FailureClass::Claim));
    }
    let mut i = inst(random_symmetric_in(3, 0.1, 0.9, 2).unwrap(), SymMatrix::identity(3).unwrap(), 0.0);
    i.f = Some(ScalarFunction::Affine { a: 1.0, b: 0.5 });
    i.bounds = Some(IntervalBounds::new(0.1, 0.9).unwrap());
    let rep = check_map_jensen(&i, &CheckOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Holds);
    assert!(rep.links.iter().all(|l| l.relation == Relation::Equal));
}

#[test]
fn replay_is_bit_exact() {
    let cfg = with(campaign(CheckId::MapJensen, 20, 0.1, 0.9), |c| {
        c.maps = vec![MapSpec::Trace];
    });
    let rep = run_campaign(&cfg).unwrap();
    let saved: opbell_core::harness::CampaignReport =
        serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
    for t in &saved.violations {
        let again = replay(&saved, t.index).unwrap();
        assert_eq!(again.verdict, t.report.verdict);
        assert_eq!(again.min_eig_gap.unwrap().to_bits(), t.min_eig_gap.to_bits());
    }
}

#[test]
fn kantorovich_propositions() {
    assert_clean(&with(campaign(CheckId::PropConcave, 200, 0.1, 0.9), |c| {
        c.f = Some(ScalarFunction::Power { p: 1.0 / 3.0 });
        c.maps = vec![MapSpec::Pinching { blocks: None }];
    }));
    assert_clean(&campaign(CheckId::PropConcave, 200, 0.1, 0.9));
    assert_clean(&campaign(CheckId::PropConvex, 200, 0.1, 0.9));
    assert_clean(&with(campaign(CheckId::PropConvex, 200, 0.1, 0.5), |c| {
        c.f = Some(ScalarFunction::PowerOneMinus { r: 3.0 });
    }));
    let a = random_symmetric_in(3, 0.1, 0.9, 8).unwrap();
    let b = random_symmetric_in(3, 0.1, 0.9, 9).unwrap();
    let mut i = inst(a, b, 0.25);
    i.f = Some(ScalarFunction::Affine { a: 2.0, b: 1.0 });
    i.bounds = Some(IntervalBounds::new(0.1, 0.9).unwrap());
    let rep = check_prop_concave(&i, &CheckOptions::default()).unwrap();
    assert!(rep.links.iter().all(|l| l.relation == Relation::Equal), "{rep:?}");
}

#[test]
fn power_theorem_and_exp_corollary() {
    assert_clean(&with(campaign(CheckId::ThmPower, 300, 0.1, 0.5), |c| {
        c.r = Some(RSpec::value(3.0));
    }));
    assert_clean(&with(campaign(CheckId::ThmPower, 300, 0.2, 0.8), |c| {
        c.r = Some(RSpec::value(-2.0));
    }));
    assert_clean(&campaign(CheckId::ExpCorollary, 300, 0.1, 0.9));
    assert_clean(&campaign(CheckId::ExpCorollary, 100, -2.0, 1.5));
}

#[test]
fn defect_lemmas_and_additive_theorem() {
    assert_clean(&campaign(CheckId::LemmaMeanDefect, 200, 0.1, 0.9));
    assert_clean(&with(campaign(CheckId::LemmaMapDefect, 200, 0.1, 0.9), |c| {
        c.f = Some(ScalarFunction::Power { p: 1.0 / 3.0 });
        c.maps = vec![MapSpec::Trace];
    }));
    assert_clean(&campaign(CheckId::LemmaMapDefect, 200, 0.1, 0.9));
    assert_clean(&campaign(CheckId::AdditiveTheorem, 300, 0.1, 0.9));
    assert_clean(&with(campaign(CheckId::AdditiveTheorem, 300, 0.1, 0.9), |c| {
        c.f = Some(ScalarFunction::Power { p: 1.0 / 3.0 });
        c.v = VStrategy::Fixed(Weight::HALF);
    }));
}

#[test]
fn additive_corollary_scalar_reduction() {
    let a = SymMatrix::diag(&[0.15, 0.3, 0.45]).unwrap();
    let mut i = inst(a.clone(), a, 0.0);
    i.r = Some(3.0);
    i.bounds = Some(IntervalBounds::new(0.1, 0.5).unwrap());
    let rep = check_additive_corollary(&i, &CheckOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Holds);
}

#[test]
fn scalar_campaigns() {
    assert_clean(&campaign(CheckId::ScalarBellman, 1000, 0.1, 0.9));
    assert_clean(&campaign(CheckId::ScalarRemarkChain, 500, 0.1, 0.9));
}

#[test]
fn out_of_range_parameters_are_recorded_not_fatal() {
    let cfg = with(campaign(CheckId::BellmanClassic, 50, 0.0, 0.95), |c| {
        c.r = Some("0:1,1.2:1.8".parse().unwrap());
    });
    let rep = run_campaign(&cfg).unwrap();
    assert!(rep.counts.hypothesis_unmet > 0);
    assert_eq!(rep.counts.violated, 0);
    assert_eq!(rep.counts.total(), 50);
}
