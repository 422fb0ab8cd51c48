//! Checks the network's analytic gradients against central finite
//! differences in double precision, on a small actor-shaped network.

use autoca::neural::{Net, NetShape, Tape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn loss(net: &Net<f64>, x: &[f64], batch: usize, c: &[f64], tape: &mut Tape<f64>) -> f64 {
    net.forward(x, batch, tape).unwrap().iter().zip(c).map(|(o, w)| o * w).sum()
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let shape = NetShape { input: 3, seq_len: 10, embed: 8, hidden: 6, dense: 8, outputs: 2 };
    let mut net: Net<f64> = Net::init(shape, &mut rng);
    let batch = 4;
    let x: Vec<f64> = (0..batch * shape.sample_len()).map(|_| [0.0, 0.5, 1.0][rng.gen_range(0..3)]).collect();
    let c: Vec<f64> = (0..batch * shape.outputs).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let mut tape = Tape::new();
    loss(&net, &x, batch, &c, &mut tape);
    let mut grads = vec![0.0; net.param_count()];
    net.backward(&mut tape, &c, &mut grads).unwrap();

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let i = rng.gen_range(0..net.param_count());
        let p = net.params[i];
        net.params[i] = p + h;
        let plus = loss(&net, &x, batch, &c, &mut tape);
        net.params[i] = p - h;
        let minus = loss(&net, &x, batch, &c, &mut tape);
        net.params[i] = p;
        let numeric = (plus - minus) / (2.0 * h);
        let err = (grads[i] - numeric).abs() / grads[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(err);
    }
    println!("{} parameters, 200 sampled, worst relative error {worst:.2e}", net.param_count());
}
