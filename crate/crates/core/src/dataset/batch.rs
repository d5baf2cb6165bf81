use rand::seq::SliceRandom;

use super::IqVector;
use crate::seed;

/// Permutation of `0..n` determined by `shuffle_seed`.
pub fn shuffled_indices(n: usize, shuffle_seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::rng(shuffle_seed));
    idx
}

/// One epoch of shuffled mini-batches. Every record appears exactly once;
/// the last batch may be short.
pub fn split_iter(records: &[IqVector], batch_size: usize, shuffle_seed: u64) -> Batches<'_> {
    assert!(batch_size >= 1, "batch_size must be at least 1");
    Batches {
        records,
        order: shuffled_indices(records.len(), shuffle_seed),
        batch_size,
        pos: 0,
    }
}

pub struct Batches<'a> {
    records: &'a [IqVector],
    order: Vec<usize>,
    batch_size: usize,
    pos: usize,
}

impl<'a> Batches<'a> {
    pub fn num_batches(&self) -> usize {
        self.order.len().div_ceil(self.batch_size)
    }
}

impl<'a> Iterator for Batches<'a> {
    type Item = Vec<&'a IqVector>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos >= self.order.len() {
            return None;
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let batch = self.order[self.pos..end].iter().map(|&i| &self.records[i]).collect();
        self.pos = end;
        Some(batch)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.order.len() - self.pos).div_ceil(self.batch_size);
        (left, Some(left))
    }
}

impl ExactSizeIterator for Batches<'_> {}
