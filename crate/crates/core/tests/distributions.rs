use approx::assert_relative_eq;
use polmax::distributions::{
    certified_dim_poisson, certified_dim_thermal, certified_dim_twin_beam, distribution_moments,
    mandel_q, poisson_distribution, su2_coherent_coefficients, thermal_distribution,
    twin_beam_distribution, twin_beam_mean, twin_beam_squeezing_for_mean, DEFAULT_TAIL_EPS,
};
use polmax::{Error, PhotonDistribution, StateSpec};
use proptest::prelude::*;

fn mass(d: &PhotonDistribution) -> f64 {
    d.probs().iter().sum()
}

#[test]
fn catalog_states_round_trip_through_json() {
    let states = vec![
        StateSpec::NPhotonPure { n: 3, k: 1 },
        StateSpec::Su2Coherent {
            n: 4,
            theta: 0.7,
            phi: 1.1,
        },
        StateSpec::QuadratureCoherent { nbar: 2.5 },
        StateSpec::TwinBeam { xi: 0.4 },
        StateSpec::ThermalTotal { nbar: 1.0 },
        StateSpec::Custom {
            dist: PhotonDistribution::from_probs(vec![0.3, 0.4, 0.3]).unwrap(),
        },
    ];
    for s in states {
        let json = serde_json::to_string(&s).unwrap();
        let back: StateSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s, "{json}");
    }
}

#[test]
fn state_tags_are_snake_case() {
    let json = serde_json::to_value(StateSpec::ThermalTotal { nbar: 1.0 }).unwrap();
    assert_eq!(json["state"], "thermal_total");
}

#[test]
fn deserialization_enforces_invariants() {
    let bad_mass = r#"{"probs":[0.5,0.4],"truncation_dim":1,"declared_mean":0.4,"tail_bound":0.0,"tail_mean_bound":0.0}"#;
    assert!(serde_json::from_str::<PhotonDistribution>(bad_mass).is_err());
    let bad_dim = r#"{"probs":[0.5,0.5],"truncation_dim":3,"declared_mean":0.5,"tail_bound":0.0,"tail_mean_bound":0.0}"#;
    assert!(serde_json::from_str::<PhotonDistribution>(bad_dim).is_err());
    let negative = r#"{"probs":[1.1,-0.1],"truncation_dim":1,"declared_mean":-0.1,"tail_bound":0.0,"tail_mean_bound":0.0}"#;
    assert!(serde_json::from_str::<PhotonDistribution>(negative).is_err());
    let good = r#"{"probs":[0.5,0.5],"truncation_dim":1,"declared_mean":0.5,"tail_bound":0.0,"tail_mean_bound":0.0}"#;
    assert_eq!(
        serde_json::from_str::<PhotonDistribution>(good)
            .unwrap()
            .prob(1),
        0.5
    );
}

#[test]
fn custom_distributions_renormalize_only_near_unit_mass() {
    let d = PhotonDistribution::from_probs(vec![0.5, 0.5 + 5e-10]).unwrap();
    assert_relative_eq!(mass(&d), 1.0, epsilon = 1e-15);
    assert!(matches!(
        PhotonDistribution::from_probs(vec![0.5, 0.6]),
        Err(Error::InvalidDistribution(_))
    ));
}

#[test]
fn catalog_distributions_hit_requested_tail() {
    for state in [
        StateSpec::QuadratureCoherent { nbar: 7.0 },
        StateSpec::ThermalTotal { nbar: 7.0 },
        StateSpec::TwinBeam { xi: 1.2 },
    ] {
        let d = state.distribution(DEFAULT_TAIL_EPS).unwrap();
        assert!(d.tail_bound() <= DEFAULT_TAIL_EPS, "{state:?}");
        assert!(
            (mass(&d) - 1.0).abs() <= 2.0 * DEFAULT_TAIL_EPS,
            "{state:?}"
        );
    }
}

#[test]
fn twin_beam_mean_inverts() {
    for nbar in [0.0, 0.1, 1.0, 10.0, 250.0] {
        let xi = twin_beam_squeezing_for_mean(nbar).unwrap();
        assert_relative_eq!(twin_beam_mean(xi), nbar, max_relative = 1e-12);
    }
}

#[test]
fn mandel_q_of_reference_laws() {
    let p = poisson_distribution(4.0, certified_dim_poisson(4.0, 1e-14).unwrap()).unwrap();
    assert!(mandel_q(&p).unwrap().abs() < 1e-10);
    let t = thermal_distribution(2.0, certified_dim_thermal(2.0, 1e-15).unwrap()).unwrap();
    assert_relative_eq!(mandel_q(&t).unwrap(), 2.0, max_relative = 1e-9);
    // Pairs only: variance 4 nbar' (nbar' + 1) on the pair number.
    let xi: f64 = 0.8;
    let z = twin_beam_distribution(xi, certified_dim_twin_beam(xi, 1e-15).unwrap()).unwrap();
    let nbar = twin_beam_mean(xi);
    assert_relative_eq!(mandel_q(&z).unwrap(), nbar + 1.0, max_relative = 1e-9);
}

proptest! {
    #[test]
    fn poisson_mean_matches_declared(nbar in 0.0_f64..200.0) {
        let d = poisson_distribution(nbar, certified_dim_poisson(nbar, 1e-12).unwrap()).unwrap();
        let (mean, _) = distribution_moments(&d);
        prop_assert!((mean - d.declared_mean()).abs() <= 1e-9 * nbar.max(1.0));
        prop_assert!((mass(&d) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn thermal_mean_matches_declared(nbar in 0.0_f64..50.0) {
        let d = thermal_distribution(nbar, certified_dim_thermal(nbar, 1e-12).unwrap()).unwrap();
        let (mean, var) = distribution_moments(&d);
        prop_assert!((mean - nbar).abs() <= 1e-9 * nbar.max(1.0));
        prop_assert!((var - nbar * (nbar + 1.0)).abs() <= 1e-6 * (nbar * (nbar + 1.0)).max(1.0));
    }

    #[test]
    fn twin_beam_mean_matches_declared(xi in 0.0_f64..2.5) {
        let d = twin_beam_distribution(xi, certified_dim_twin_beam(xi, 1e-12).unwrap()).unwrap();
        let (mean, _) = distribution_moments(&d);
        prop_assert!((mean - twin_beam_mean(xi)).abs() <= 1e-9 * twin_beam_mean(xi).max(1.0));
        prop_assert!(d.probs().iter().skip(1).step_by(2).all(|&p| p == 0.0));
    }

    #[test]
    fn su2_moduli_ignore_phase(n in 0_usize..80, theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU) {
        let a = su2_coherent_coefficients(n, theta, 0.0).unwrap();
        let b = su2_coherent_coefficients(n, theta, phi).unwrap();
        let norm: f64 = b.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.norm() - y.norm()).abs() < 1e-14);
        }
    }
}
