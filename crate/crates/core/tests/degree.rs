use approx::assert_relative_eq;
use polmax::degree::{
    degree_coherent_closed_form, degree_of_state, degree_optimal_closed_form, degree_pure_n_photon,
    degree_thermal_series, degree_twin_beam_exact, hs_degree, optimal_distribution,
};
use polmax::distributions::{
    certified_dim_poisson, certified_dim_thermal, certified_dim_twin_beam, poisson_distribution,
    thermal_distribution, twin_beam_distribution, twin_beam_mean,
};
use polmax::{DegreeMethod, DegreeResult, PhotonDistribution, StateSpec};

#[test]
fn unpolarized_states_have_zero_degree() {
    // Maximally mixed within each manifold: purity sum p_N^2/(N+1).
    let d = PhotonDistribution::from_probs(vec![0.2, 0.5, 0.3]).unwrap();
    let purity = 0.04 + 0.25 / 2.0 + 0.09 / 3.0;
    assert!(hs_degree(&d, purity).unwrap().value.abs() < 1e-15);
    assert!(hs_degree(&d, purity * 0.9).is_err());
}

#[test]
fn catalog_degrees_follow_their_closed_forms() {
    let cases = [
        (StateSpec::NPhotonPure { n: 4, k: 2 }, 0.8),
        (
            StateSpec::Su2Coherent {
                n: 1,
                theta: 0.3,
                phi: 0.0,
            },
            0.5,
        ),
        (StateSpec::QuadratureCoherent { nbar: 0.0 }, 0.0),
        (StateSpec::ThermalTotal { nbar: 0.0 }, 0.0),
        (StateSpec::TwinBeam { xi: 0.0 }, 0.0),
    ];
    for (state, want) in cases {
        assert_relative_eq!(
            degree_of_state(&state, 1.0).unwrap().value,
            want,
            epsilon = 1e-15
        );
    }
    assert!(degree_of_state(&StateSpec::NPhotonPure { n: 2, k: 0 }, 0.5).is_err());
}

#[test]
fn frozen_reference_values() {
    // Computed independently at 30 digits.
    let cases = [
        (
            degree_coherent_closed_form(1.0).unwrap().value,
            0.784_730_710_751_062_4,
        ),
        (
            degree_coherent_closed_form(10.0).unwrap().value,
            0.991_249_377_781_671_1,
        ),
        (
            degree_thermal_series(1.0).unwrap().value,
            1.0 - (4.0_f64 / 3.0).ln(),
        ),
        (degree_optimal_closed_form(1.0).unwrap().value, 0.8),
        (
            degree_optimal_closed_form(2.5).unwrap().value,
            1.0 - 3.0 / 48.0,
        ),
    ];
    for (got, want) in cases {
        assert_relative_eq!(got, want, max_relative = 1e-14);
    }
}

#[test]
fn series_agree_with_closed_forms() {
    for nbar in [0.05, 0.5, 2.0, 12.0, 40.0] {
        let p = poisson_distribution(nbar, certified_dim_poisson(nbar, 1e-13).unwrap()).unwrap();
        let c = degree_coherent_closed_form(nbar).unwrap();
        assert!(
            (hs_degree(&p, 1.0).unwrap().value - c.value).abs() < 1e-12,
            "coherent {nbar}"
        );

        let t = thermal_distribution(nbar, certified_dim_thermal(nbar, 1e-13).unwrap()).unwrap();
        let c = degree_thermal_series(nbar).unwrap();
        assert!(
            (hs_degree(&t, 1.0).unwrap().value - c.value).abs() < 1e-11,
            "thermal {nbar}"
        );
    }
    for xi in [0.05, 0.5, 1.0, 2.0, 2.8] {
        let z = twin_beam_distribution(xi, certified_dim_twin_beam(xi, 1e-13).unwrap()).unwrap();
        let c = degree_twin_beam_exact(xi).unwrap();
        assert!(
            (hs_degree(&z, 1.0).unwrap().value - c.value).abs() < 1e-11,
            "twin {xi}"
        );
    }
}

#[test]
fn optimum_beats_every_catalog_state_at_equal_mean() {
    for m in 1..=15_usize {
        let nbar = m as f64;
        let best = degree_optimal_closed_form(nbar).unwrap().value;
        assert!(best > degree_pure_n_photon(m).value);
        assert!(best > degree_coherent_closed_form(nbar).unwrap().value);
        assert!(best > degree_thermal_series(nbar).unwrap().value);
    }
    for xi in [0.3, 1.0, 2.0] {
        let best = degree_optimal_closed_form(twin_beam_mean(xi))
            .unwrap()
            .value;
        assert!(best > degree_twin_beam_exact(xi).unwrap().value);
    }
}

#[test]
fn parabolic_optimum_has_linear_mandel_line() {
    for i in 1..=30 {
        let nbar = f64::from(i) / 2.0;
        let d = optimal_distribution(nbar).unwrap();
        let (mean, var) = polmax::distributions::distribution_moments(&d);
        assert_relative_eq!(mean, nbar, max_relative = 1e-13);
        assert_relative_eq!(var, nbar * (nbar + 2.0) / 5.0, max_relative = 1e-12);
    }
}

#[test]
fn degree_result_round_trips() {
    let r = degree_coherent_closed_form(3.0).unwrap();
    let back: DegreeResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.method, DegreeMethod::ClosedForm);
    assert_eq!(
        serde_json::to_value(DegreeMethod::FromQp).unwrap(),
        "from_qp"
    );
}
