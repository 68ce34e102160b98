use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use stcs::classifier::{Classifier, InitialParams, SelfAdaptiveRates};
use stcs::env::grid_world::GridWorld;
use stcs::env::Environment;
use stcs::genome::{Genome, NetworkSpec, Representation};
use stcs::rng::derive_stream;
use stcs::Engine;
use stcs::EngineParams;

fn spec(representation: Representation) -> NetworkSpec {
    NetworkSpec { representation, inputs: 2, hidden: 3, density: 0.7 }
}

fn network_evaluation(c: &mut Criterion) {
    let mut rng = derive_stream(0, "bench");
    for repr in [Representation::Spiking, Representation::Mlp] {
        let mut g = Genome::random(&spec(repr), &mut rng).unwrap();
        c.bench_function(&format!("evaluate/{repr}"), |b| {
            b.iter(|| {
                g.reset_membranes();
                g.evaluate(black_box(&[0.3, 0.7])).unwrap()
            })
        });
    }
}

fn match_set_formation(c: &mut Criterion) {
    let env = GridWorld::new(0.05, 0.0);
    let s = spec(Representation::Spiking);
    let mut engine = Engine::new(EngineParams::default(), s, env.decoder()).unwrap();
    let mut rng = derive_stream(1, "bench");
    for _ in 0..1000 {
        let id = engine.population.allocate_id();
        let g = Genome::random(&s, &mut rng).unwrap();
        engine.population.insert(Classifier::new(id, g, SelfAdaptiveRates::uniform(0.1), &InitialParams::default(), 0));
    }
    c.bench_function("match_set/1000", |b| {
        b.iter(|| {
            let mut e = engine.clone();
            e.form_match_set(black_box(&[0.4, 0.2]), 0, &mut rng).unwrap().entries.len()
        })
    });
}

criterion_group!(benches, network_evaluation, match_set_formation);
criterion_main!(benches);
