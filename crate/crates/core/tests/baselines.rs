use distrl::baselines::{
    design_spec_tune, run_base_case, tune_reflux, DistillateTarget, FeedSource, SequenceTemplate,
    SplitTarget, StreamRole, TemplateColumn, Topology, TuneOptions,
};
use distrl::column::SolverOptions;
use distrl::env::EnvConfig;
use distrl::stream::Stream;
use distrl::thermo::{Antoine, ComponentBank, ComponentSpec};

fn feed() -> Stream {
    let z = [0.06, 33.69, 35.65, 15.32, 10.21, 5.13];
    let s: f64 = z.iter().sum();
    Stream::new(z.iter().map(|v| v / s).collect(), 12_400.0, 105.0, 17.0)
}

fn first_column(target: f64) -> TemplateColumn {
    TemplateColumn {
        light_key: 1,
        source: FeedSource::Feed,
        pressure: 17.2,
        n_stages: 30,
        feed_stage: 15,
        distillate: DistillateTarget::KeyPurity(target),
        split: SplitTarget::Recovery(0.99),
    }
}

#[test]
fn trivial_purity_needs_minimum_reflux() {
    let bank = ComponentBank::default();
    let (spec, _) = tune_reflux(
        &bank,
        &feed(),
        &first_column(0.0),
        0.35,
        &TuneOptions::default(),
        &SolverOptions::default(),
    )
    .unwrap()
    .expect("target is met everywhere");
    assert_eq!(spec.reflux_ratio, 1.0);
}

#[test]
fn tighter_purity_needs_more_reflux() {
    let bank = ComponentBank::default();
    let rr = |target: f64| {
        tune_reflux(
            &bank,
            &feed(),
            &first_column(target),
            0.34,
            &TuneOptions::default(),
            &SolverOptions::default(),
        )
        .unwrap()
        .expect("reachable")
        .0
        .reflux_ratio
    };
    let v: Vec<f64> = [0.90, 0.93, 0.95, 0.96].iter().map(|&t| rr(t)).collect();
    assert!(v.windows(2).all(|w| w[1] > w[0]), "{v:?}");
}

#[test]
fn unreachable_purity_is_reported() {
    let bank = ComponentBank::default();
    // propane cannot reach 99.99% overhead when D/F exceeds its feed share
    let r = tune_reflux(
        &bank,
        &feed(),
        &first_column(0.9999),
        0.45,
        &TuneOptions::default(),
        &SolverOptions::default(),
    )
    .unwrap();
    assert!(r.is_none());
}

/// Two components with a relative volatility of about 10^3.
fn wide_binary() -> ComponentBank {
    let mk = |name: &str, a: f64| ComponentSpec {
        name: name.into(),
        formula: String::new(),
        molar_mass: 50.0,
        antoine: Antoine {
            a,
            b: 1000.0,
            c: -20.0,
        },
        dh_vap: 20_000.0,
        t_min: 150.0,
        t_max: 500.0,
        fit_range: None,
    };
    ComponentBank::new(vec![mk("light", 7.0), mk("heavy", 4.0)]).unwrap()
}

#[test]
fn ideal_binary_split_takes_the_light_fraction_overhead() {
    let bank = wide_binary();
    for z in [0.3, 0.5, 0.7] {
        let f = Stream::new(vec![z, 1.0 - z], 100.0, 50.0, 2.0);
        let col = TemplateColumn {
            light_key: 0,
            source: FeedSource::Feed,
            pressure: 2.0,
            n_stages: 20,
            feed_stage: 10,
            distillate: DistillateTarget::KeyPurity(0.999),
            split: SplitTarget::Recovery(0.999),
        };
        let t = design_spec_tune(
            &bank,
            &f,
            &col,
            &TuneOptions::default(),
            &SolverOptions::default(),
            0,
        )
        .unwrap();
        assert!(
            (t.distillate_fraction - z).abs() < 2e-3,
            "z {z}: D/F {}",
            t.distillate_fraction
        );
    }
}

#[test]
fn both_reference_sequences_deliver_five_products() {
    let env = EnvConfig::default();
    for topology in [Topology::Linear, Topology::Tree] {
        let template = SequenceTemplate::for_topology(topology, env.purity_spec);
        let r = run_base_case(&template, &env, &TuneOptions::default()).unwrap();
        let products: Vec<_> = r
            .streams
            .iter()
            .filter(|s| s.role == StreamRole::Product)
            .collect();
        assert_eq!(products.len(), 5, "{}", topology.as_str());
        assert!(products.iter().all(|s| s.stream.purity().1 >= 0.95));
        // each product sells a different component
        let mut keys: Vec<usize> = products.iter().map(|s| s.stream.purity().0).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 5);
        assert!(r.mass_closure_error < 1e-6);
        assert_eq!(r.columns.len(), 4);
        assert!((r.profit - (r.revenue - r.tac - r.penalty)).abs() < 1e-9);
    }
}

#[test]
fn first_linear_column_split_matches_the_reference_flowsheet() {
    let env = EnvConfig::default();
    let r = run_base_case(
        &SequenceTemplate::linear(env.purity_spec),
        &env,
        &TuneOptions::default(),
    )
    .unwrap();
    let c = &r.columns[0];
    // D/F lands on the published 0.35; the reflux ratio does not (see README)
    assert!((c.distillate_fraction - 0.35).abs() <= 0.5 * 0.35);
    println!(
        "linear column 1: RR {:.2}, D/F {:.3}",
        c.spec.reflux_ratio, c.distillate_fraction
    );
}
