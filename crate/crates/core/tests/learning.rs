use distrl::neural::{Adam, Mlp};
use distrl::sac::{squash, ReplayBuffer, SacAgent, SacConfig, Transition};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn net(seed: u64, sizes: &[usize]) -> Mlp {
    Mlp::init(sizes, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn backprop_matches_finite_differences(
        seed in 0u64..10_000,
        x in prop::collection::vec(-2.0..2.0f64, 3),
        up in prop::collection::vec(-1.0..1.0f64, 2),
    ) {
        let m = net(seed, &[3, 6, 5, 2]);
        let loss = |m: &Mlp, x: &[f64]| -> f64 {
            m.forward(x).unwrap().iter().zip(&up).map(|(o, u)| o * u).sum()
        };
        let cache = m.forward_cached(&x).unwrap();
        let mut g = vec![0.0; m.params().len()];
        let dx = m.backward(&cache, &up, &mut g).unwrap();
        let h = 1e-6;
        for (i, gi) in g.iter().enumerate() {
            let mut p = m.clone();
            p.params_mut()[i] += h;
            let mut q = m.clone();
            q.params_mut()[i] -= h;
            let fd = (loss(&p, &x) - loss(&q, &x)) / (2.0 * h);
            prop_assert!((fd - gi).abs() < 1e-6 * (1.0 + fd.abs()), "param {i}: {fd} vs {gi}");
        }
        for i in 0..x.len() {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let fd = (loss(&m, &xp) - loss(&m, &xm)) / (2.0 * h);
            prop_assert!((fd - dx[i]).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn mlp_serialization_is_lossless(seed in 0u64..10_000) {
        let m = net(seed, &[4, 7, 3]);
        let back: Mlp = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.forward(&[0.1, 0.2, 0.3, 0.4]).unwrap(), m.forward(&[0.1, 0.2, 0.3, 0.4]).unwrap());
    }

    #[test]
    fn squashed_actions_stay_in_the_box(
        raw in prop::collection::vec(-50.0..50.0f64, 6),
        noise in prop::collection::vec(-5.0..5.0f64, 3),
    ) {
        let p = squash(&raw, &noise, 2, (-20.0, 2.0));
        prop_assert!(p.action.iter().all(|a| (-1.0..=1.0).contains(a)));
        prop_assert!(p.log_prob.is_finite());
    }
}

#[test]
fn adam_minimizes_a_quadratic() {
    let mut x = vec![3.0, -2.0];
    let mut opt = Adam::new(2, 0.05);
    for _ in 0..2000 {
        let g: Vec<f64> = x
            .iter()
            .zip([1.0, -1.0])
            .map(|(v, c)| 2.0 * (v - c))
            .collect();
        opt.step(&mut x, &g).unwrap();
    }
    assert!(
        (x[0] - 1.0).abs() < 1e-3 && (x[1] + 1.0).abs() < 1e-3,
        "{x:?}"
    );
}

#[test]
fn dimension_mismatch_is_an_error() {
    let m = net(0, &[3, 4, 2]);
    assert!(m.forward(&[1.0, 2.0]).is_err());
    assert!(Mlp::from_params(&[3, 4, 2], vec![0.0; 5]).is_err());
    assert!(Mlp::zeros(&[3]).is_err());
}

fn bandit_transition(agent: &SacAgent, rng: &mut ChaCha8Rng) -> Transition {
    let p = agent.act(&[1.0], true, rng);
    let a = p.action[0];
    Transition {
        obs: vec![1.0],
        action: p.action,
        pre_tanh: p.pre_tanh,
        reward: -(a - 0.3) * (a - 0.3),
        next_obs: vec![1.0],
        done: true,
    }
}

#[test]
fn agent_state_round_trips_and_stays_deterministic() {
    let cfg = SacConfig {
        hidden: vec![16, 16],
        min_buffer: 8,
        batch_size: 8,
        ..SacConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut agent = SacAgent::new(1, 1, 1, cfg, &mut rng).unwrap();
    let mut buf = ReplayBuffer::new(100);
    for _ in 0..20 {
        let t = bandit_transition(&agent, &mut rng);
        buf.push(t);
        agent.update(&buf, &mut rng);
    }
    let json = serde_json::to_string(&(&agent, &buf, &rng)).unwrap();
    let (mut a2, b2, mut r2): (SacAgent, ReplayBuffer, ChaCha8Rng) =
        serde_json::from_str(&json).unwrap();
    let s1 = agent.update(&buf, &mut rng).unwrap();
    let s2 = a2.update(&b2, &mut r2).unwrap();
    assert_eq!(s1, s2);
    assert_eq!(agent.actor(), a2.actor());
}

#[test]
fn fixed_temperature_is_not_learned() {
    let cfg = SacConfig {
        hidden: vec![8],
        min_buffer: 4,
        batch_size: 4,
        learn_alpha: false,
        initial_alpha: 0.2,
        ..SacConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut agent = SacAgent::new(1, 1, 1, cfg, &mut rng).unwrap();
    let mut buf = ReplayBuffer::new(100);
    for _ in 0..30 {
        let t = bandit_transition(&agent, &mut rng);
        buf.push(t);
        agent.update(&buf, &mut rng);
    }
    assert!((agent.alpha() - 0.2).abs() < 1e-15);
}

#[test]
fn twin_critics_are_independent_networks() {
    let cfg = SacConfig {
        twin_critic: true,
        hidden: vec![8],
        ..SacConfig::default()
    };
    let agent = SacAgent::new(2, 1, 1, cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(agent.critics().len(), 2);
    assert_ne!(agent.critics()[0], agent.critics()[1]);
    assert_eq!(agent.targets()[0], agent.critics()[0]);
}
