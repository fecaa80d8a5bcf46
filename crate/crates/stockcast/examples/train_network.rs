//! Train a small sigmoid network directly with online gradient descent.
//!
//! Builds a 5:21:21:1 network from a seeded uniform [-0.5, 0.5] draw, fits it
//! to a noiseless sine mapping, and shows the epoch loss falling. Also
//! round-trips the trained network through its text serialization.
//!
//! Run with: cargo run --example train_network

use stockcast::{Network, Topology, TrainSample};

fn main() -> stockcast::Result<()> {
    // Targets in (0, 1) so the sigmoid output can represent them exactly.
    let samples: Vec<TrainSample> = (0..60)
        .map(|i| {
            let t = i as f64 / 10.0;
            let window: Vec<f64> = (0..5)
                .map(|k| 0.5 + 0.3 * (t + k as f64 / 10.0).sin())
                .collect();
            TrainSample {
                target: 0.5 + 0.3 * (t + 0.5).sin(),
                input: window,
            }
        })
        .collect();

    let topology = Topology::default(); // 5:21:21:1
    let mut net = Network::random(topology, 42);

    println!("topology: {}", net.topology());
    for epoch in 0..2000 {
        let mse = net.train_epoch(&samples, 0.1)?;
        if epoch % 400 == 0 || epoch == 1999 {
            println!("epoch {epoch:4}  mse {mse:.8}");
        }
    }

    let probe = &samples[30];
    println!(
        "sample 30: predicted {:.5}, target {:.5}",
        net.predict(&probe.input)?,
        probe.target
    );

    // The text form round-trips every parameter bit-exactly.
    let restored = Network::deserialize(&net.serialize())?;
    assert_eq!(restored, net);
    println!("serialize/deserialize round-trip: exact");
    Ok(())
}
