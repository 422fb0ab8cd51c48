//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Learning criteria dominate the runtime. `AUTOCA_ACCEPTANCE_EPOCHS` caps
//! every training run (useful for a quick smoke pass); the default is the
//! desk-scale budget below.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use autoca::agent::{Bernoulli, Scripted};
use autoca::baseline::{BackoffConfig, CsmaState, RtsCtsAgent};
use autoca::bss::Bss;
use autoca::eval::{EvalPlan, Evaluation};
use autoca::experiment::{
    baseline, preset, prepare, run_all, run_arm, AgentFamily, ArmSummary, ExperimentConfig, Prepared,
};
use autoca::medium::{AccessMode, SimConfig};
use autoca::metrics::Fairness;
use autoca::neural::{Net, NetShape, Tape};
use autoca::observation::{Entry, ObservationBuffer, Revision};
use autoca::oracle::{optimal_bound, OracleConfig};
use autoca::reward::{window_reward, RewardBranch, WindowCounts};
use autoca::topology::{resolve, NAMED_TOPOLOGIES};
use autoca::trainer::{gae_advantages, surrogate_gradient, SurrogateSettings, TrainConfig, Trainer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Training epochs per seed for the learning criteria.
const LEARN_EPOCHS: usize = 800;
/// Epochs between progress evaluations of a training run.
const CHECK_EVERY: usize = 50;

type Outcome = Result<String, String>;

struct Acceptance {
    passed: usize,
    failed: usize,
    /// Normalized fairness of every evaluation run, for the global bound.
    fairness_seen: Vec<(String, f64)>,
    epoch_cap: usize,
}

impl Acceptance {
    fn criterion(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Outcome) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| f(self)))
            .unwrap_or_else(|e| Err(format!("panicked: {}", panic_message(&e))));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => {
                self.passed += 1;
                println!("PASS  {name}: {detail} ({secs:.0}s)");
            }
            Err(detail) => {
                self.failed += 1;
                println!("FAIL  {name}: {detail} ({secs:.0}s)");
            }
        }
    }

    fn saw(&mut self, label: impl Into<String>, ev: &Evaluation) {
        self.fairness_seen.push((label.into(), ev.report.normalized_fairness));
    }

    fn saw_arm(&mut self, summary: &ArmSummary) {
        for s in &summary.seeds {
            self.saw(format!("{}/seed-{}", summary.name, s.seed), &s.evaluation);
        }
    }

    fn epochs(&self, wanted: usize) -> usize {
        wanted.min(self.epoch_cap)
    }
}

fn panic_message(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

// ---------------------------------------------------------------------------
// Protocol

fn reward_branches() -> Outcome {
    let c = |m: &[usize]| WindowCounts { m: m.to_vec() };
    let cases = [
        (c(&[2, 2]), vec![true, false], true, RewardBranch::FairSuccess, 1.0),
        (c(&[3, 2]), vec![false, true], true, RewardBranch::FairSuccess, 1.0),
        (c(&[0, 3]), vec![true, false], true, RewardBranch::CatchUpSuccess, 1.0),
        (c(&[0, 0, 4]), vec![false, true, false], true, RewardBranch::CatchUpSuccess, 1.0),
        (c(&[0, 3]), vec![false, true], true, RewardBranch::UnfairSuccess, -1.0),
        (c(&[1, 1]), vec![false, false], true, RewardBranch::Failure, -1.0),
        (c(&[1, 1]), vec![false, false], false, RewardBranch::NoStart, 0.0),
    ];
    for (counts, delta, start, branch, value) in &cases {
        let got = window_reward(counts, delta, *start);
        if got != *branch || got.value() != *value {
            return Err(format!("counts {:?} delta {delta:?}: got {got:?}", counts.m));
        }
    }
    Ok(format!("{} cases", cases.len()))
}

fn lookback_of<A: autoca::agent::Agent>(bss: &Bss<A>, n: usize) -> &autoca::observation::Observation {
    match bss.observation(n) {
        ObservationBuffer::LookBack(o) => o,
        ObservationBuffer::AckRow(_) => panic!("expected a look-back observation"),
    }
}

fn three_ack_fixture() -> Outcome {
    let graph = resolve("topo3p").unwrap();
    let sim = SimConfig { lookback: 30, ..SimConfig::default() };
    let pad = |s: &str| format!("{s:0<64}");
    let agents = vec![
        Scripted::from_bits(&pad("01")),
        Scripted::from_bits(&pad("0000000100000000000100")),
        Scripted::from_bits(&pad("0000000000000100000100")),
    ];
    let mut bss = Bss::new(&graph, sim, AccessMode::Basic, agents).unwrap();
    bss.track_revisions(true);
    for _ in 0..30 {
        bss.step();
    }
    let revisions = bss.revisions(0);
    let expected = |s: usize| match s {
        5 => Revision::OwnSuccess,
        11 => Revision::AudibleSuccess,
        17 => Revision::HiddenSuccess,
        _ => Revision::None,
    };
    if let Some(s) = (0..30).find(|&s| revisions[s] != expected(s)) {
        return Err(format!("slot {s}: {:?}", revisions[s]));
    }
    let obs = lookback_of(&bss, 0);
    let row = |pick: &dyn Fn(&autoca::observation::Column) -> Entry| -> String {
        (0..30)
            .map(|s| match pick(obs.recent(30 - s)) {
                Entry::Zero => '0',
                Entry::One => '1',
                Entry::Unk => '?',
            })
            .collect()
    };
    let th = row(&|c| c.th);
    let oh = row(&|c| c.oh);
    ensure(
        th == "?00000?00000?11111????????????" && oh == "000000011111000000011111000000",
        format!("own, audible and hidden ACK plus the collision's no-revision; th {th}"),
    )
}

fn backoff_window() -> Outcome {
    let mut s = CsmaState::new(BackoffConfig::default(), 1, ChaCha8Rng::seed_from_u64(1));
    let mut seen = vec![s.cw];
    for _ in 0..8 {
        s.on_failure();
        seen.push(s.cw);
        if s.backoff > s.cw {
            return Err(format!("backoff {} above window {}", s.backoff, s.cw));
        }
    }
    s.on_success();
    seen.push(s.cw);
    ensure(seen == [2, 4, 8, 16, 32, 64, 128, 128, 128, 2], format!("windows {seen:?}"))
}

fn rts_no_data_collisions() -> Outcome {
    let sim = SimConfig::default();
    let (mut packets, mut failed) = (0, 0);
    for (name, _) in NAMED_TOPOLOGIES {
        let graph = resolve(name).unwrap();
        for seed in 0..3u64 {
            let agents = (0..graph.terminal_count())
                .map(|n| {
                    let rng = ChaCha8Rng::seed_from_u64(seed * 31 + n as u64);
                    RtsCtsAgent::new(BackoffConfig::default(), sim.difs, sim.packet_len, rng)
                })
                .collect();
            let mut bss = Bss::new(&graph, sim.clone(), AccessMode::RtsCts, agents).unwrap();
            for _ in 0..20_000 {
                bss.step();
            }
            let ledger = bss.medium().ledger();
            let d = ledger.packet_len();
            let mut all: Vec<_> = ledger.all_packets().copied().collect();
            all.sort_by_key(|p| p.start);
            packets += all.len();
            failed += all.iter().filter(|p| !p.success).count();
            for w in all.windows(2) {
                if w[1].start < w[0].start + d {
                    return Err(format!("{name} seed {seed}: DATA overlap at slot {}", w[1].start));
                }
            }
        }
    }
    // A terminal that was sending its own RTS while a CTS went out misses the
    // NAV and can later corrupt DATA with an RTS; that is not a DATA overlap.
    Ok(format!(
        "{} topologies, {packets} DATA packets, none overlapping ({failed} lost to an RTS from a terminal that missed the CTS)",
        NAMED_TOPOLOGIES.len()
    ))
}

fn observation_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let sim = SimConfig { lookback: 24, ..SimConfig::default() };
    let episodes = 10_000u64;
    let mut known = 0usize;
    for episode in 0..episodes {
        let (name, _) = NAMED_TOPOLOGIES[episode as usize % NAMED_TOPOLOGIES.len()];
        let graph = resolve(name).unwrap();
        let parts = graph.partitions();
        let p: f64 = rng.gen_range(0.02..0.6);
        let agents: Vec<Bernoulli> =
            (0..graph.terminal_count()).map(|_| Bernoulli::new(p, ChaCha8Rng::seed_from_u64(rng.gen()))).collect();
        let mut bss = Bss::new(&graph, sim.clone(), AccessMode::Basic, agents).unwrap();
        let mut history: Vec<Vec<u8>> = Vec::new();
        for _ in 0..rng.gen_range(30..90) {
            history.push(bss.step().actions.clone());
        }
        for (n, part) in parts.iter().enumerate() {
            let obs = lookback_of(&bss, n);
            for age in 1..=obs.width().min(history.len()) {
                let truth = &history[history.len() - age];
                let column = obs.recent(age);
                let any = |set: &[usize]| set.iter().any(|&m| truth[m] == 1);
                for (entry, actual) in [(column.oh, any(&part.oh_set)), (column.th, any(&part.th_set))] {
                    if let Some(bit) = entry.known() {
                        known += 1;
                        if bit != actual {
                            return Err(format!("{name} episode {episode} terminal {n} age {age}"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{episodes} episodes, {known} known entries, 0 contradictions"))
}

// ---------------------------------------------------------------------------
// Numerics

fn gae_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(1..80);
        let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let (gamma, lambda) = (0.99, rng.gen_range(0.0..=1.0));
        let fast = gae_advantages(&r, &v, gamma, lambda).unwrap();
        for t in 0..n {
            let direct: f64 = (t..n)
                .map(|k| {
                    let next = if k + 1 < n { v[k + 1] } else { 0.0 };
                    (gamma * lambda).powi((k - t) as i32) * (r[k] + gamma * next - v[k])
                })
                .sum();
            worst = worst.max((fast[t] - direct).abs());
        }
    }
    ensure(worst < 1e-12, format!("max abs difference {worst:.1e}"))
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let h = 1e-5;
    let (mut worst, mut checked, mut kinks): (f64, usize, usize) = (0.0, 0, 0);
    for draw in 0..100 {
        // Actor-like and critic-like small networks in turn.
        let shape = if draw % 2 == 0 {
            NetShape { input: 3, seq_len: 6, embed: 5, hidden: 4, dense: 6, outputs: 2 }
        } else {
            NetShape { input: 2, seq_len: 6, embed: 5, hidden: 4, dense: 6, outputs: 1 }
        };
        let mut net: Net<f64> = Net::init(shape, &mut rng);
        let batch = 2;
        let x: Vec<f64> = (0..batch * shape.sample_len()).map(|_| [0.0, 0.5, 1.0][rng.gen_range(0..3)]).collect();
        let c: Vec<f64> = (0..batch * shape.outputs).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut tape = Tape::new();
        let loss = |net: &Net<f64>, tape: &mut Tape<f64>| -> (f64, Vec<bool>) {
            let out = net.forward(&x, batch, tape).unwrap();
            (out.iter().zip(&c).map(|(o, w)| o * w).sum(), tape.relu_mask())
        };
        let (_, mask) = loss(&net, &mut tape);
        let mut grads = vec![0.0; net.param_count()];
        net.backward(&mut tape, &c, &mut grads).unwrap();
        for _ in 0..20 {
            let i = rng.gen_range(0..net.param_count());
            let p = net.params[i];
            net.params[i] = p + h;
            let (plus, m1) = loss(&net, &mut tape);
            net.params[i] = p - h;
            let (minus, m2) = loss(&net, &mut tape);
            net.params[i] = p;
            if m1 != mask || m2 != mask {
                kinks += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * h);
            worst = worst.max((grads[i] - numeric).abs() / grads[i].abs().max(numeric.abs()).max(1e-6));
            checked += 1;
        }
    }
    ensure(
        worst < 1e-4 && kinks * 20 < checked,
        format!("100 draws, {checked} parameters, max relative error {worst:.1e}, {kinks} kink probes skipped"),
    )
}

fn ratio_is_one() -> Outcome {
    let mut trainer = Trainer::new(resolve("topo3p").unwrap(), SimConfig::default(), TrainConfig::default(), 5).unwrap();
    let mut ratios = 0;
    for _ in 0..3 {
        let ep = trainer.rollout().unwrap();
        let adv: Vec<f64> = (0..ep.len()).map(|i| (i as f64).cos()).collect();
        for n in 0..trainer.actors().len() {
            let batch = Trainer::actor_batch(&ep, n, &adv);
            let mut grads = vec![0.0; trainer.actors()[n].param_count()];
            let out = surrogate_gradient(
                &trainer.actors()[n],
                &batch,
                &SurrogateSettings::default(),
                &mut Tape::new(),
                &mut grads,
            );
            if let Some(r) = out.ratios.iter().find(|&&r| r != 1.0) {
                return Err(format!("ratio {r} before the first update"));
            }
            ratios += out.ratios.len();
        }
        trainer.train_epoch().unwrap();
    }
    Ok(format!("{ratios} ratios over 3 epochs, all exactly 1"))
}

// ---------------------------------------------------------------------------
// Oracle

fn oracle_closed_forms() -> Outcome {
    let sim = SimConfig::default();
    let f = Fairness::default();
    let bound = |name: &str| optimal_bound(&resolve(name).unwrap(), sim.packet_len, sim.difs, f, &OracleConfig::default()).unwrap().value;
    let (b2, b2p) = (bound("topo2"), bound("topo2p"));
    let (e2, e2p) = (2.0 * (5.0f64 / 12.0 + 0.001).ln(), 2.0 * (0.5f64 + 0.001).ln());
    ensure(
        (b2 - e2).abs() < 1e-9 && (b2p - e2p).abs() < 1e-9,
        format!("topo2 {b2:.9} (expected {e2:.9}), topo2p {b2p:.9} (expected {e2p:.9})"),
    )
}

// ---------------------------------------------------------------------------
// Classical baseline

fn run_baseline(acc: &mut Acceptance, topology: &str, family: AgentFamily) -> ArmSummary {
    let out = tempfile::tempdir().unwrap();
    let cfg = baseline(&format!("{}-{topology}", family.name()), topology, family);
    let summary = run_arm(&cfg, out.path()).unwrap();
    acc.saw_arm(&summary);
    summary
}

fn seed_means(summary: &ArmSummary, pick: impl Fn(&Evaluation) -> f64) -> f64 {
    mean(&summary.seeds.iter().map(|s| pick(&s.evaluation)).collect::<Vec<_>>())
}

// ---------------------------------------------------------------------------
// Learning

fn learned_arm(preset_name: &str, arm: &str) -> ExperimentConfig {
    preset(preset_name).unwrap().into_iter().find(|c| c.name == arm).unwrap()
}

fn final_plan(cfg: &ExperimentConfig, prep: &Prepared) -> EvalPlan {
    EvalPlan {
        warmup: cfg.sim.lookback as u64,
        slots: cfg.eval.slots,
        window: cfg.eval.window,
        fairness: cfg.fairness,
        upper_bound: prep.upper_bound,
        trace_slots: 0,
    }
}

struct Progress {
    epoch: usize,
    eval: Evaluation,
}

/// Trains one seed for `epochs`, evaluating before training and every
/// `CHECK_EVERY` epochs. The last entry is the trained policy.
fn train(acc: &mut Acceptance, cfg: &ExperimentConfig, seed: u64, epochs: usize) -> Vec<Progress> {
    let prep = prepare(cfg).unwrap();
    let plan = final_plan(cfg, &prep);
    let mut trainer = Trainer::new(prep.graph.clone(), cfg.sim.clone(), cfg.train_config(), seed).unwrap();
    let mut history = vec![Progress { epoch: 0, eval: trainer.evaluate(&plan, cfg.eval.mode, seed ^ 0xACCE).unwrap() }];
    for epoch in 1..=epochs {
        trainer.train_epoch().unwrap();
        if epoch % CHECK_EVERY == 0 || epoch == epochs {
            let eval = trainer.evaluate(&plan, cfg.eval.mode, seed ^ 0xACCE ^ epoch as u64).unwrap();
            acc.saw(format!("{}/seed-{seed}/epoch-{epoch}", cfg.name), &eval);
            history.push(Progress { epoch, eval });
        }
    }
    history
}

fn within(tp: &[f64], rel: f64) -> bool {
    let max = tp.iter().copied().fold(0.0, f64::max);
    let min = tp.iter().copied().fold(f64::INFINITY, f64::min);
    max > 0.0 && (max - min) <= rel * max
}

fn monopolized(tp: &[f64]) -> bool {
    let max = tp.iter().copied().fold(0.0, f64::max);
    let min = tp.iter().copied().fold(f64::INFINITY, f64::min);
    max > 0.0 && min < 0.1 * max
}

fn topo2_window_reward(acc: &mut Acceptance) -> Outcome {
    let cfg = learned_arm("topo2-reward-ablation", "window-reward");
    let epochs = acc.epochs(LEARN_EPOCHS);
    let good = |e: &Evaluation| e.report.normalized_fairness >= 0.9 && within(&e.report.throughput, 0.2);
    let mut lines = Vec::new();
    for seed in 1..=3 {
        let h = train(acc, &cfg, seed, epochs);
        let last = h.last().unwrap();
        let r = &last.eval.report;
        lines.push(format!("seed {seed} epoch {} nf {:.3} tp {}", last.epoch, r.normalized_fairness, fmt_list(&r.throughput)));
        if good(&last.eval) {
            return Ok(lines.join("; "));
        }
    }
    Err(lines.join("; "))
}

fn topo2_alpha_reward(acc: &mut Acceptance) -> Outcome {
    let cfg = learned_arm("topo2-reward-ablation", "alpha-reward");
    let epochs = acc.epochs(LEARN_EPOCHS);
    let mut lines = Vec::new();
    let mut any = false;
    for seed in 1..=3 {
        let h = train(acc, &cfg, seed, epochs);
        let last = h.last().unwrap();
        let r = &last.eval.report;
        let transient = h.iter().skip(1).filter(|p| monopolized(&p.eval.report.throughput)).map(|p| p.epoch).collect::<Vec<_>>();
        any |= monopolized(&r.throughput);
        lines.push(format!(
            "seed {seed} final tp {} nf {:.3} (monopolized at epochs {transient:?})",
            fmt_list(&r.throughput),
            r.normalized_fairness
        ));
    }
    ensure(any, format!("after {epochs} epochs: {}", lines.join("; ")))
}

fn topo2p_throughput_and_unknowns(acc: &mut Acceptance) -> (Outcome, Outcome) {
    let cfg = learned_arm("topo2p-obs-ablation", "lookback-obs");
    let epochs = acc.epochs(LEARN_EPOCHS);
    let good = |e: &Evaluation| e.report.bss_throughput >= 0.9 && e.unknown_fraction < 0.05;
    let (mut tp_lines, mut unk_lines) = (Vec::new(), Vec::new());
    let (mut tp_ok, mut unk_ok) = (false, false);
    for seed in 1..=3 {
        let h = train(acc, &cfg, seed, epochs);
        let (first, last) = (&h[0].eval, &h.last().unwrap().eval);
        let epoch = h.last().unwrap().epoch;
        tp_ok |= last.report.bss_throughput >= 0.9;
        unk_ok |= last.unknown_fraction < 0.05 && last.unknown_fraction < first.unknown_fraction;
        tp_lines.push(format!("seed {seed} epoch {epoch} tp {:.3}", last.report.bss_throughput));
        unk_lines.push(format!("seed {seed} unk {:.3} -> {:.3}", first.unknown_fraction, last.unknown_fraction));
        if good(last) {
            break;
        }
    }
    (ensure(tp_ok, tp_lines.join("; ")), ensure(unk_ok, unk_lines.join("; ")))
}

fn beats_csma(acc: &mut Acceptance, topology: &str) -> Outcome {
    let arms = preset(&format!("{topology}-fairness")).unwrap();
    let madrl = arms.iter().find(|c| c.agent == AgentFamily::MadrlHt).unwrap().clone();
    let csma = run_baseline(acc, topology, AgentFamily::Csma);
    let csma_nf = seed_means(&csma, |e| e.report.normalized_fairness);
    let epochs = acc.epochs(LEARN_EPOCHS);
    let nf: Vec<f64> = (1..=3)
        .map(|seed| train(acc, &madrl, seed, epochs).last().unwrap().eval.report.normalized_fairness)
        .collect();
    ensure(
        mean(&nf) > csma_nf,
        format!("MADRL-HT nf {:.3} {} after {epochs} epochs vs CSMA/CA {csma_nf:.3}", mean(&nf), fmt_list(&nf)),
    )
}

// ---------------------------------------------------------------------------
// Determinism

fn determinism() -> Outcome {
    let mut arms = Vec::new();
    for mut arm in preset("topo3p-rtscts").unwrap() {
        arm.seeds.truncate(2);
        arm.train.epochs = 20;
        arm.train.eval_every = 10;
        arm.eval.slots = 3 * arm.eval.window;
        arms.push(arm);
    }
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_all(&arms, a.path()).unwrap();
    run_all(&arms, b.path()).unwrap();
    let mut files = 0;
    for entry in walk(a.path()) {
        if entry.extension().map_or(false, |e| e == "csv") {
            let rel = entry.strip_prefix(a.path()).unwrap();
            if std::fs::read(&entry).unwrap() != std::fs::read(b.path().join(rel)).unwrap() {
                return Err(format!("{} differs", rel.display()));
            }
            files += 1;
        }
    }
    ensure(files >= 6, format!("{files} metric CSVs byte-identical across two runs"))
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out.sort();
    out
}

fn main() {
    let epoch_cap = std::env::var("AUTOCA_ACCEPTANCE_EPOCHS").ok().and_then(|s| s.parse().ok()).unwrap_or(usize::MAX);
    let mut acc = Acceptance { passed: 0, failed: 0, fairness_seen: Vec::new(), epoch_cap };

    acc.criterion("1 window reward branches", |_| reward_branches());
    acc.criterion("1 look-back revision fixture", |_| three_ack_fixture());
    acc.criterion("1 CSMA/CA window doubling, cap and reset", |_| backoff_window());
    acc.criterion("1 RTS/CTS has no DATA collisions", |_| rts_no_data_collisions());
    acc.criterion("1 observation soundness", |_| observation_soundness());

    acc.criterion("2 GAE equals direct summation", |_| gae_brute_force());
    acc.criterion("2 gradients match finite differences", |_| gradient_check());
    acc.criterion("2 PPO ratio is 1 before the update", |_| ratio_is_one());

    acc.criterion("3 optimal bound closed forms", |_| oracle_closed_forms());

    let mut csma4 = None;
    let mut csma4p = None;
    acc.criterion("4 CSMA/CA PCR on topo4 is 23% +- 5", |acc| {
        let s = run_baseline(acc, "topo4", AgentFamily::Csma);
        let pcr = seed_means(&s, |e| e.report.pcr.unwrap_or(0.0));
        csma4 = Some(s);
        ensure((pcr - 0.23).abs() <= 0.05, format!("{:.1}% over 10 seeds x 1 s", 100.0 * pcr))
    });
    acc.criterion("4 CSMA/CA PCR on topo4p is 37% +- 5", |acc| {
        let s = run_baseline(acc, "topo4p", AgentFamily::Csma);
        let pcr = seed_means(&s, |e| e.report.pcr.unwrap_or(0.0));
        csma4p = Some(s);
        ensure((pcr - 0.37).abs() <= 0.05, format!("{:.1}% over 10 seeds x 1 s", 100.0 * pcr))
    });
    let delay = |s: &Option<ArmSummary>| s.as_ref().map(|s| seed_means(s, |e| e.report.delay_ms));
    let (d4, d4p) = (delay(&csma4), delay(&csma4p));
    acc.criterion("4 CSMA/CA mean delay on topo4 is 8.23 ms +- 50%", |_| {
        let d = d4.ok_or("baseline run failed")?;
        ensure((d - 8.23).abs() <= 0.5 * 8.23, format!("{d:.3} ms"))
    });
    acc.criterion("4 CSMA/CA mean delay on topo4p is 25.06 ms +- 50%", |_| {
        let d = d4p.ok_or("baseline run failed")?;
        ensure((d - 25.06).abs() <= 0.5 * 25.06, format!("{d:.3} ms"))
    });
    acc.criterion("4 CSMA/CA delay ordering topo4p > topo4", |_| {
        let (a, b) = (d4.ok_or("baseline run failed")?, d4p.ok_or("baseline run failed")?);
        ensure(b > a, format!("topo4 {a:.3} ms, topo4p {b:.3} ms"))
    });

    acc.criterion("5 topo2 window reward is fair", topo2_window_reward);
    acc.criterion("5 topo2 alpha reward monopolizes", topo2_alpha_reward);
    let mut unknowns = None;
    acc.criterion("5 topo2p BSS throughput >= 0.9", |acc| {
        let (tp, unk) = topo2p_throughput_and_unknowns(acc);
        unknowns = Some(unk);
        tp
    });
    acc.criterion("5 topo2p unknown fraction falls below 0.05", |_| {
        unknowns.unwrap_or_else(|| Err("training run failed".into()))
    });
    acc.criterion("5 MADRL-HT beats CSMA/CA on topo3p", |acc| beats_csma(acc, "topo3p"));
    acc.criterion("5 MADRL-HT beats CSMA/CA on topo4p", |acc| beats_csma(acc, "topo4p"));

    acc.criterion("6 preset re-runs are byte-identical", |_| determinism());

    let seen = std::mem::take(&mut acc.fairness_seen);
    acc.criterion("3 normalized fairness never exceeds 1", |_| {
        let worst = seen.iter().max_by(|a, b| a.1.total_cmp(&b.1));
        match worst {
            Some((label, nf)) => ensure(*nf <= 1.0 + 1e-9, format!("{} runs, highest {nf:.6} ({label})", seen.len())),
            None => Err("no runs recorded".into()),
        }
    });

    println!("{} passed, {} failed", acc.passed, acc.failed);
}
