use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::hafnian::hafnian;
use crate::linalg::{submatrix_by_indices, ComplexMatrix};
use crate::pattern::PhotonPattern;

/// The Max-Haf objective `S ↦ |Haf(B_S)|`.
///
/// `queries` counts every call to [`value`](Self::value) and is what solver
/// budgets are measured in. `eval_count` counts Hafnians actually computed;
/// with the cache enabled (the default) repeated patterns are free, so
/// `eval_count <= queries`.
#[derive(Debug)]
pub struct ObjectiveOracle<'a> {
    b: &'a ComplexMatrix,
    queries: u64,
    eval_count: u64,
    cache: Option<HashMap<u64, f64>>,
}

impl<'a> ObjectiveOracle<'a> {
    pub fn new(b: &'a ComplexMatrix) -> Self {
        Self {
            b,
            queries: 0,
            eval_count: 0,
            cache: Some(HashMap::new()),
        }
    }

    pub fn without_cache(b: &'a ComplexMatrix) -> Self {
        Self {
            cache: None,
            ..Self::new(b)
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.b
    }

    pub fn n(&self) -> usize {
        self.b.dim()
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    pub fn value(&mut self, s: &PhotonPattern) -> Result<f64> {
        if s.n() != self.b.dim() {
            return Err(Error::invalid(format!(
                "pattern over {} modes for a {}-mode matrix",
                s.n(),
                self.b.dim()
            )));
        }
        self.queries += 1;
        if let Some(&v) = self.cache.as_ref().and_then(|c| c.get(&s.mask())) {
            return Ok(v);
        }
        // sqrt(norm_sqr) rather than norm() so values match brute_force_maxhaf bit for bit
        let v = hafnian(&submatrix_by_indices(self.b, &s.indices()))?.norm_sqr().sqrt();
        self.eval_count += 1;
        if let Some(c) = self.cache.as_mut() {
            c.insert(s.mask(), v);
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_hits_do_not_count_as_evaluations() {
        let b = ComplexMatrix::adjacency(4, &[(0, 1), (2, 3)]).unwrap();
        let s = PhotonPattern::from_indices(4, &[0, 1]).unwrap();
        let mut o = ObjectiveOracle::new(&b);
        assert_eq!(o.value(&s).unwrap(), 1.0);
        assert_eq!(o.value(&s).unwrap(), 1.0);
        assert_eq!((o.queries(), o.eval_count()), (2, 1));

        let mut o = ObjectiveOracle::without_cache(&b);
        o.value(&s).unwrap();
        o.value(&s).unwrap();
        assert_eq!((o.queries(), o.eval_count()), (2, 2));
    }

    #[test]
    fn mismatched_pattern_is_rejected() {
        let b = ComplexMatrix::zeros(4);
        let mut o = ObjectiveOracle::new(&b);
        assert!(o.value(&PhotonPattern::full(3).unwrap()).is_err());
    }
}
