//! Central finite differences against the analytic backward pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Net, NetShape, Tape};

const H: f64 = 1e-4;
const TOL: f64 = 1e-4;

fn objective(net: &Net<f64>, x: &[f64], batch: usize, c: &[f64], tape: &mut Tape<f64>) -> (f64, Vec<bool>) {
    let out = net.forward(x, batch, tape).unwrap();
    (out.iter().zip(c).map(|(o, w)| o * w).sum(), tape.relu_mask())
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

struct Outcome {
    worst: f64,
    checked: usize,
    skipped: usize,
}

/// Compares analytic and numeric gradients for the parameters in `which`.
/// Perturbations that flip a ReLU are skipped: the function has a kink there.
fn check_params(net: &mut Net<f64>, x: &[f64], batch: usize, which: &[usize], rng: &mut ChaCha8Rng) -> Outcome {
    let outputs = net.shape().outputs;
    let c: Vec<f64> = (0..batch * outputs).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut tape = Tape::new();
    let (_, mask) = objective(net, x, batch, &c, &mut tape);
    let mut grads = vec![0.0; net.param_count()];
    net.backward(&mut tape, &c, &mut grads).unwrap();
    let mut out = Outcome { worst: 0.0, checked: 0, skipped: 0 };
    for &i in which {
        let orig = net.params[i];
        net.params[i] = orig + H;
        let (plus, m1) = objective(net, x, batch, &c, &mut tape);
        net.params[i] = orig - H;
        let (minus, m2) = objective(net, x, batch, &c, &mut tape);
        net.params[i] = orig;
        if m1 != mask || m2 != mask {
            out.skipped += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * H);
        out.worst = out.worst.max(rel_err(grads[i], numeric));
        out.checked += 1;
    }
    out
}

fn random_input(shape: &NetShape, batch: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    // Observation-like values: 0, 0.5 or 1.
    (0..batch * shape.sample_len()).map(|_| [0.0, 0.5, 1.0][rng.gen_range(0..3)]).collect()
}

fn toy(input: usize, outputs: usize) -> NetShape {
    NetShape { input, seq_len: 8, embed: 5, hidden: 4, dense: 6, outputs }
}

#[test]
fn every_parameter_of_small_nets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let (mut checked, mut skipped) = (0, 0);
    for draw in 0..100 {
        // Alternate a critic over two terminals and an actor.
        let shape = if draw % 2 == 0 { toy(2, 1) } else { toy(3, 2) };
        let mut net: Net<f64> = Net::init(shape, &mut rng);
        let x = random_input(&shape, 2, &mut rng);
        let all: Vec<usize> = (0..net.param_count()).collect();
        let o = check_params(&mut net, &x, 2, &all, &mut rng);
        worst = worst.max(o.worst);
        checked += o.checked;
        skipped += o.skipped;
    }
    assert!(worst < TOL, "max relative error {worst}");
    assert!(skipped * 100 < checked, "too many kinks: {skipped} of {checked}");
}

#[test]
fn sampled_parameters_of_full_size_nets() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for shape in [NetShape::actor(8), NetShape::critic(2, 8)] {
        let mut net: Net<f64> = Net::init(shape, &mut rng);
        let x = random_input(&shape, 1, &mut rng);
        let l = net.layout().clone();
        // A few parameters from every tensor.
        let mut which = Vec::new();
        for r in [l.w1, l.b1, l.fwd.wx, l.fwd.wh, l.fwd.b, l.bwd.wx, l.bwd.wh, l.bwd.b, l.w2, l.b2, l.w3, l.b3] {
            for _ in 0..12 {
                which.push(rng.gen_range(r.clone()));
            }
        }
        let o = check_params(&mut net, &x, 1, &which, &mut rng);
        assert!(o.worst < TOL, "{shape:?}: {}", o.worst);
        assert!(o.checked > which.len() * 9 / 10);
    }
}

#[test]
fn recurrent_cell_over_three_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let shape = NetShape { input: 2, seq_len: 3, embed: 3, hidden: 3, dense: 4, outputs: 1 };
    for _ in 0..20 {
        let mut net: Net<f64> = Net::init(shape, &mut rng);
        let x = random_input(&shape, 1, &mut rng);
        let l = net.layout().clone();
        let which: Vec<usize> = (l.fwd.wx.start..l.bwd.b.end).collect();
        let o = check_params(&mut net, &x, 1, &which, &mut rng);
        assert!(o.worst < TOL, "{}", o.worst);
    }
}

#[test]
fn input_jacobian_matches_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shape = NetShape::actor(10);
    let net: Net<f64> = Net::init(shape, &mut rng);
    let x: Vec<f64> = (0..shape.sample_len()).map(|_| rng.gen_range(0.2..0.8)).collect();
    let mut tape = Tape::new();
    let base = net.eval(&x, &mut tape).unwrap();
    let mut grads = vec![0.0; net.param_count()];
    net.backward(&mut tape, &[1.0, 0.0], &mut grads).unwrap();
    let jac = tape.input_gradient(shape.input, shape.seq_len);
    for i in [0, 7, 15, 29] {
        let mut xp = x.clone();
        xp[i] += 1e-6;
        let moved = net.eval(&xp, &mut tape).unwrap();
        let delta = moved[0] - base[0];
        assert!((delta - 1e-6 * jac[i]).abs() < 1e-10, "{delta} vs {}", 1e-6 * jac[i]);
    }
}
