//! Population snapshots: a `key=value` header followed by one classifier per
//! line. Every real is written with 17 significant digits so a reload is
//! exact.

use crate::classifier::{Classifier, SelfAdaptiveRates};
use crate::engine::Population;
use crate::error::{Error, Result};
use crate::genome::Genome;

pub const MAGIC: &str = "# stcs-snapshot v1";

pub fn classifier_from_record(line: &str) -> Result<Classifier> {
    let bad = |msg: &str| Error::config(format!("bad classifier record ({msg})"));
    let mut fields = std::collections::HashMap::new();
    for tok in line.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| bad("token without ="))?;
        fields.insert(k, v);
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(k));
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(k)) };
    let int = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(k)) };
    let reals = |k: &str| -> Result<Vec<f64>> { get(k)?.split(',').map(|x| x.parse().map_err(|_| bad(k))).collect() };
    let genome = Genome::from_record(get("genome")?)?;
    let weights = reals("w")?;
    if weights.len() != genome.inputs() + 1 {
        return Err(bad("weight count"));
    }
    let rates: [f64; 4] = reals("rates")?.try_into().map_err(|_| bad("rates"))?;
    let numerosity = int("num")?;
    if numerosity == 0 || numerosity > u32::MAX as u64 {
        return Err(bad("numerosity"));
    }
    let genome_hash = genome.genome_hash();
    Ok(Classifier {
        id: int("id")?,
        genome,
        genome_hash,
        weights,
        error: num("err")?,
        fitness: num("fit")?,
        numerosity: numerosity as u32,
        experience: int("exp")?,
        timestamp: int("ts")?,
        action_set_size: num("as")?,
        rates: SelfAdaptiveRates::from_array(rates),
    })
}

/// Header lines as ordered pairs, then classifier lines.
pub fn render(header: &[(String, String)], population: &Population) -> String {
    let mut s = String::from(MAGIC);
    s.push('\n');
    for (k, v) in header {
        s.push_str(&format!("{k}={v}\n"));
    }
    s.push_str(&format!("classifiers={}\n", population.len()));
    for cl in population.iter() {
        s.push_str(&cl.to_record());
        s.push('\n');
    }
    s
}

pub struct Parsed {
    pub header: Vec<(String, String)>,
    pub population: Population,
}

pub fn parse(text: &str) -> Result<Parsed> {
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(Error::config("not a snapshot file"));
    }
    let mut header = Vec::new();
    let count: usize = loop {
        let line = lines.next().ok_or_else(|| Error::config("snapshot header truncated"))?;
        let (k, v) = line.split_once('=').ok_or_else(|| Error::config(format!("bad header line `{line}`")))?;
        if k == "classifiers" {
            break v.parse().map_err(|_| Error::config("bad classifier count"))?;
        }
        header.push((k.to_string(), v.to_string()));
    };
    let items = lines.take(count).map(classifier_from_record).collect::<Result<Vec<_>>>()?;
    if items.len() != count {
        return Err(Error::config("snapshot truncated"));
    }
    let next_id = header
        .iter()
        .find(|(k, _)| k == "next_id")
        .map(|(_, v)| v.parse::<u64>())
        .transpose()
        .map_err(|_| Error::config("bad next_id"))?
        .unwrap_or_else(|| items.iter().map(|c| c.id + 1).max().unwrap_or(0));
    Ok(Parsed { header, population: Population::from_parts(items, next_id) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::InitialParams;
    use crate::genome::{NetworkSpec, Representation};
    use crate::rng::derive_stream;

    #[test]
    fn records_reload_exactly() {
        let mut rng = derive_stream(4, "s");
        let mut pop = Population::new();
        for repr in [Representation::Spiking, Representation::Mlp] {
            let spec = NetworkSpec { representation: repr, inputs: 2, hidden: 2, density: 0.7 };
            let g = Genome::random(&spec, &mut rng).unwrap();
            let mut c = Classifier::new(
                pop.allocate_id(),
                g,
                SelfAdaptiveRates::random(&mut rng, 1e-4),
                &InitialParams::default(),
                3,
            );
            c.weights = vec![0.1, -2.5e-7, 1.0 / 3.0];
            c.error = 0.7;
            pop.insert(c);
        }
        let text = render(&[("trial".into(), "10".into()), ("next_id".into(), "2".into())], &pop);
        let back = parse(&text).unwrap();
        assert_eq!(back.population.len(), 2);
        assert_eq!(back.population.next_id(), 2);
        for (a, b) in pop.iter().zip(back.population.iter()) {
            assert_eq!(a.to_record(), b.to_record());
            assert_eq!(a.weights, b.weights);
        }
    }

    #[test]
    fn truncated_snapshot_fails() {
        assert!(parse("# stcs-snapshot v1\ntrial=1\nclassifiers=2\n").is_err());
        assert!(parse("garbage").is_err());
    }
}
