//! Macroclassifier storage with numerosity accounting and deletion.

use std::collections::HashMap;

use rand::Rng;

use super::EngineParams;
use crate::classifier::{Classifier, ClassifierId};

#[derive(Clone, Debug, Default)]
pub struct Population {
    items: Vec<Classifier>,
    index: HashMap<ClassifierId, usize>,
    next_id: ClassifierId,
}

/// Where an inserted classifier ended up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inserted {
    New(ClassifierId),
    /// An identical genome existed; its numerosity was raised.
    Merged(ClassifierId),
}

impl Inserted {
    pub fn id(self) -> ClassifierId {
        match self {
            Inserted::New(id) | Inserted::Merged(id) => id,
        }
    }
}

impl Population {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn from_parts(items: Vec<Classifier>, next_id: ClassifierId) -> Self {
        let index = items.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
        Population { items, index, next_id }
    }

    pub fn next_id(&self) -> ClassifierId {
        self.next_id
    }

    pub fn allocate_id(&mut self) -> ClassifierId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Number of macroclassifiers.
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn numerosity(&self) -> u64 {
        self.items.iter().map(|c| c.numerosity as u64).sum()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Classifier> {
        self.items.iter()
    }

    pub fn iter_mut(&mut self) -> std::slice::IterMut<'_, Classifier> {
        self.items.iter_mut()
    }

    pub fn as_slice(&self) -> &[Classifier] {
        &self.items
    }

    pub fn get(&self, id: ClassifierId) -> Option<&Classifier> {
        self.index.get(&id).map(|&i| &self.items[i])
    }

    pub fn get_mut(&mut self, id: ClassifierId) -> Option<&mut Classifier> {
        match self.index.get(&id) {
            Some(&i) => Some(&mut self.items[i]),
            None => None,
        }
    }

    pub fn contains(&self, id: ClassifierId) -> bool {
        self.index.contains_key(&id)
    }

    /// Add a classifier, merging it into an existing macroclassifier with an
    /// identical genome.
    pub fn insert(&mut self, cl: Classifier) -> Inserted {
        if let Some(existing) =
            self.items.iter_mut().find(|c| c.genome_hash == cl.genome_hash && c.genome.same_genome(&cl.genome))
        {
            existing.numerosity += cl.numerosity;
            return Inserted::Merged(existing.id);
        }
        let id = cl.id;
        self.next_id = self.next_id.max(id + 1);
        self.index.insert(id, self.items.len());
        self.items.push(cl);
        Inserted::New(id)
    }

    /// Remove a whole macroclassifier. Order of the remaining ones is kept.
    pub fn remove(&mut self, id: ClassifierId) -> Option<Classifier> {
        let pos = self.index.remove(&id)?;
        let cl = self.items.remove(pos);
        for c in &self.items[pos..] {
            *self.index.get_mut(&c.id).expect("indexed") -= 1;
        }
        Some(cl)
    }

    /// Deletion vote of one macroclassifier given the population mean fitness.
    pub fn deletion_vote(cl: &Classifier, mean_fitness: f64, params: &EngineParams) -> f64 {
        let num = cl.numerosity as f64;
        let mut vote = cl.action_set_size * num;
        let micro_fitness = cl.fitness / num;
        if cl.experience > params.theta_del && micro_fitness < params.delta * mean_fitness && micro_fitness > 0.0 {
            vote *= mean_fitness / micro_fitness;
        }
        vote
    }

    /// Remove one microclassifier chosen by roulette over deletion votes.
    /// Classifiers in `protected` are skipped unless nothing else is left.
    pub fn delete_one<R: Rng + ?Sized>(
        &mut self,
        params: &EngineParams,
        protected: &[ClassifierId],
        rng: &mut R,
    ) -> Option<ClassifierId> {
        if self.items.is_empty() {
            return None;
        }
        let total_num = self.numerosity() as f64;
        let mean_fitness = self.items.iter().map(|c| c.fitness).sum::<f64>() / total_num;
        let mut votes: Vec<f64> = self
            .items
            .iter()
            .map(|c| if protected.contains(&c.id) { 0.0 } else { Self::deletion_vote(c, mean_fitness, params) })
            .collect();
        if votes.iter().sum::<f64>() <= 0.0 {
            votes = self.items.iter().map(|c| Self::deletion_vote(c, mean_fitness, params)).collect();
        }
        let pos = roulette(&votes, rng).unwrap_or(0);
        let id = self.items[pos].id;
        let cl = &mut self.items[pos];
        if cl.numerosity > 1 {
            cl.numerosity -= 1;
        } else {
            self.remove(id);
        }
        Some(id)
    }

    /// Delete microclassifiers until the summed numerosity fits `cap`.
    pub fn enforce_cap<R: Rng + ?Sized>(
        &mut self,
        params: &EngineParams,
        protected: &[ClassifierId],
        rng: &mut R,
    ) -> Vec<ClassifierId> {
        let mut deleted = Vec::new();
        while self.numerosity() > params.population_cap as u64 {
            match self.delete_one(params, protected, rng) {
                Some(id) => deleted.push(id),
                None => break,
            }
        }
        deleted
    }

    /// Insert each classifier, then delete down to the cap.
    pub fn insert_and_enforce_cap<R: Rng + ?Sized>(
        &mut self,
        new: Vec<Classifier>,
        params: &EngineParams,
        protected: &[ClassifierId],
        rng: &mut R,
    ) -> Vec<Inserted> {
        let placed: Vec<Inserted> = new.into_iter().map(|c| self.insert(c)).collect();
        let mut keep: Vec<ClassifierId> = protected.to_vec();
        keep.extend(placed.iter().map(|p| p.id()));
        self.enforce_cap(params, &keep, rng);
        placed
    }
}

/// Index chosen with probability proportional to its non-negative weight.
pub fn roulette<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let mut point = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if point < w {
                return Some(i);
            }
            point -= w;
            last = Some(i);
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{InitialParams, SelfAdaptiveRates};
    use crate::genome::{Genome, NetworkSpec, Representation};
    use crate::rng::derive_stream;

    fn classifier(pop: &mut Population, seed: u64) -> Classifier {
        let spec = NetworkSpec { representation: Representation::Spiking, inputs: 2, hidden: 1, density: 1.0 };
        let g = Genome::random(&spec, &mut derive_stream(seed, "p")).unwrap();
        Classifier::new(pop.allocate_id(), g, SelfAdaptiveRates::uniform(0.5), &InitialParams::default(), 0)
    }

    #[test]
    fn duplicate_genome_merges() {
        let mut pop = Population::new();
        let a = classifier(&mut pop, 1);
        let mut b = a.clone();
        b.id = pop.allocate_id();
        pop.insert(a);
        assert_eq!(pop.insert(b), Inserted::Merged(0));
        assert_eq!(pop.len(), 1);
        assert_eq!(pop.numerosity(), 2);
    }

    #[test]
    fn cap_deletes_exactly_the_overflow() {
        let params = EngineParams { population_cap: 5, ..EngineParams::default() };
        let mut pop = Population::new();
        let mut rng = derive_stream(0, "d");
        for s in 0..5 {
            let c = classifier(&mut pop, s);
            pop.insert(c);
        }
        let extra = classifier(&mut pop, 99);
        pop.insert_and_enforce_cap(vec![extra], &params, &[], &mut rng);
        assert_eq!(pop.numerosity(), 5);
    }

    #[test]
    fn removal_keeps_lookup_consistent() {
        let mut pop = Population::new();
        for s in 0..4 {
            let c = classifier(&mut pop, s);
            pop.insert(c);
        }
        pop.remove(1).unwrap();
        for id in [0, 2, 3] {
            assert_eq!(pop.get(id).unwrap().id, id);
        }
        assert!(pop.get(1).is_none());
    }

    #[test]
    fn vote_multiplier_for_weak_experienced_classifiers() {
        let params = EngineParams::default();
        let mut pop = Population::new();
        let mut c = classifier(&mut pop, 3);
        c.experience = 100;
        c.fitness = 0.001;
        c.action_set_size = 2.0;
        assert_eq!(Population::deletion_vote(&c, 0.5, &params), 2.0 * 0.5 / 0.001);
        c.experience = 10;
        assert_eq!(Population::deletion_vote(&c, 0.5, &params), 2.0);
    }

    #[test]
    fn roulette_skips_zero_weights() {
        let mut rng = derive_stream(1, "r");
        for _ in 0..100 {
            assert_eq!(roulette(&[0.0, 3.0, 0.0], &mut rng), Some(1));
        }
        assert_eq!(roulette(&[0.0, 0.0], &mut rng), None);
    }
}
