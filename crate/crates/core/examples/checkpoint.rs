//! Saves a freshly initialized actor, reloads it, and shows that the
//! reloaded copy produces identical outputs and refuses a foreign config hash.

use autoca::neural::{load_checkpoint, save_checkpoint, Net, NetShape, Tape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let net: Net<f32> = Net::init(NetShape::actor(40), &mut ChaCha8Rng::seed_from_u64(5));
    let mut bytes = Vec::new();
    save_checkpoint(&net, "cafe01", &mut bytes).unwrap();
    println!("{} parameters in {} bytes", net.param_count(), bytes.len());

    let (back, hash): (Net<f32>, String) = load_checkpoint(bytes.as_slice(), Some("cafe01")).unwrap();
    let x = vec![0.5f32; net.shape().sample_len()];
    let mut tape = Tape::new();
    let a = net.eval(&x, &mut tape).unwrap();
    let b = back.eval(&x, &mut tape).unwrap();
    println!("hash {hash}, outputs {a:?} vs {b:?}, identical: {}", a == b);

    match load_checkpoint::<f32, _>(bytes.as_slice(), Some("beef02")) {
        Err(e) => println!("loading under another config: {e}"),
        Ok(_) => unreachable!(),
    }
}
