mod common;

use common::histories::{self, History};
use proptest::prelude::*;
use sentrade_core::adaptive::{step_engine, EngineParams, SpreadMode, TfwEngine};
use sentrade_core::model_space::ModelClass;
use sentrade_core::pipeline::{compute_signals, run_adaptive, PipelineConfig, SpreadScope};
use sentrade_core::synth::{ScenarioKind, SyntheticScenario};

#[test]
fn replay_matches_single_step_oracle() {
    for seed in 0..50 {
        let h = histories::random(seed, 200);
        let engine = histories::run(&h, 20, 0);
        let (err, mismatches) = histories::replay(&engine, &h);
        assert!(err <= 1e-12, "seed {seed}: error {err}");
        assert_eq!(mismatches, 0, "seed {seed}");
    }
}

#[test]
fn infeasible_sessions_only_decay_quality() {
    let h = History { params: EngineParams { initial_quality: 5.0, ..EngineParams::new(0.4, 0.5) }, votes: vec![None, None], realized: vec![0.03, -0.02] };
    let e = histories::run(&h, 20, 7);
    assert_eq!(e.history()[0].quality_after, 2.0);
    assert!((e.history()[1].quality_after - 0.8).abs() < 1e-15);
    assert_eq!(e.spread(), 1.0);
    assert!(e.history().iter().all(|r| r.emitted.is_none() && !r.feasible));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quality_is_bounded(seed in any::<u64>(), beta in 0.0..0.99f64) {
        let mut h = histories::random(seed, 300);
        h.params.beta = beta;
        let r_max = h.realized.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let e = histories::run(&h, 20, 0);
        for (t, rec) in e.history().iter().enumerate() {
            let bound = 100.0 * r_max / (1.0 - beta) + beta.powi(t as i32 + 1) * h.params.initial_quality.abs();
            prop_assert!(rec.quality_after.abs() <= bound * (1.0 + 1e-12), "t={} |Q|={} bound={}", t, rec.quality_after, bound);
        }
    }

    #[test]
    fn emissions_are_signs(seed in any::<u64>()) {
        let h = histories::random(seed, 100);
        let e = histories::run(&h, 20, 0);
        for rec in e.history() {
            if let Some(d) = rec.emitted {
                prop_assert!(d.value() == 1.0 || d.value() == -1.0);
                prop_assert!(rec.chosen_class.is_some());
            }
        }
    }

    #[test]
    fn gamma_zero_forgets_older_history(seed in any::<u64>(), junk in -50.0..50.0f64) {
        let mut h = histories::random(seed, 120);
        h.params.gamma = 0.0;
        let e = histories::run(&h, 20, 0);
        for t in 1..h.votes.len() {
            // Fresh engine with an arbitrary spread that only sees session t-1.
            let mut probe = TfwEngine::new(20, EngineParams { initial_spread: junk, ..h.params });
            let v = h.votes[t - 1].as_ref().map(|v| histories::to_votes(v));
            probe.advance(t - 1, v.as_deref(), h.realized[t - 1], SpreadMode::Own);
            if h.votes[t - 1].is_some() {
                prop_assert_eq!(sentrade_core::adaptive::select_class(probe.spread()), sentrade_core::adaptive::select_class(e.history()[t].spread_before));
            }
        }
    }
}

fn scenario(kind: ScenarioKind, n: usize, seed: u64) -> sentrade_core::sessions::SessionSeries {
    SyntheticScenario::new(kind, n, seed).generate().unwrap()
}

#[test]
fn pipeline_matches_stepwise_engines() {
    let series = scenario(ScenarioKind::SentimentDriven, 90, 4);
    let cfg = PipelineConfig { tfw_min: 20, tfw_max: 24, ..PipelineConfig::default() };
    let table = compute_signals(&series, &cfg, cfg.warmup()..series.len()).unwrap();
    let params = EngineParams::new(0.4, 0.3);
    let run = run_adaptive(&table, params, SpreadScope::PerTfw);
    for engine in &run.engines {
        let mut solo = TfwEngine::new(engine.window(), params);
        for t in cfg.warmup()..series.len() {
            step_engine(&mut solo, &series, t, &cfg.model).unwrap();
        }
        assert_eq!(&solo, engine);
    }
}

#[test]
fn engines_do_not_depend_on_each_other() {
    let series = scenario(ScenarioKind::Noise, 100, 9);
    let params = EngineParams::new(0.4, 0.0);
    let wide = PipelineConfig { tfw_min: 20, tfw_max: 30, ..PipelineConfig::default() };
    let narrow = PipelineConfig { tfw_min: 25, tfw_max: 25, ..PipelineConfig::default() };
    let span = wide.warmup()..series.len();
    let a = run_adaptive(&compute_signals(&series, &wide, span.clone()).unwrap(), params, SpreadScope::PerTfw);
    let b = run_adaptive(&compute_signals(&series, &narrow, span).unwrap(), params, SpreadScope::PerTfw);
    let from_wide = a.engines.iter().find(|e| e.window() == 25).unwrap();
    assert_eq!(from_wide, &b.engines[0]);
}

#[test]
fn thread_count_does_not_matter() {
    let series = scenario(ScenarioKind::SentimentDriven, 80, 2);
    let cfg = PipelineConfig { tfw_min: 20, tfw_max: 26, ..PipelineConfig::default() };
    let go = || {
        let table = compute_signals(&series, &cfg, cfg.warmup()..series.len()).unwrap();
        run_adaptive(&table, EngineParams::new(0.4, 0.2), SpreadScope::PerTfw)
    };
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let one = pool(1).install(go);
    let four = pool(4).install(go);
    assert_eq!(one, four);
}

#[test]
fn global_spread_is_shared() {
    let series = scenario(ScenarioKind::SentimentDriven, 80, 2);
    let cfg = PipelineConfig { tfw_min: 20, tfw_max: 24, spread_scope: SpreadScope::Global, ..PipelineConfig::default() };
    let table = compute_signals(&series, &cfg, cfg.warmup()..series.len()).unwrap();
    let run = run_adaptive(&table, EngineParams::new(0.4, 0.5), SpreadScope::Global);
    for i in 0..run.engines[0].history().len() {
        let s: Vec<f64> = run.engines.iter().map(|e| e.history()[i].spread_after).collect();
        assert!(s.windows(2).all(|p| p[0] == p[1]));
    }
}

#[test]
fn noise_abstains_without_survivors() {
    let series = scenario(ScenarioKind::Noise, 120, 3);
    let cfg = PipelineConfig::default();
    let mut engine = TfwEngine::new(20, EngineParams::new(0.4, 0.0));
    for t in cfg.warmup()..series.len() {
        let emitted = step_engine(&mut engine, &series, t, &cfg.model).unwrap();
        let rec = engine.record_at(t).unwrap();
        let class = if rec.chosen_class == Some(ModelClass::Sentiment) { rec.sentiment } else { rec.financial };
        if class.n_models == 0 {
            assert_eq!(emitted, None);
        }
        assert_eq!(emitted, class.majority);
    }
}
