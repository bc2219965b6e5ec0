//! External associative memory: a vector of scalar cells addressed through
//! key interpolation and temperature-scaled softmax attention.
//!
//! The key matrix is the identity, so addresses and keys coincide. At the
//! default temperature an integer address collapses the attention to a single
//! slot (the off-slot logits underflow to exactly zero after max-subtraction),
//! which makes reads and writes hard lookups at tolerance zero. Fractional
//! addresses interpolate between the two adjacent cells.

use crate::error::{Error, Result};

/// Default softmax temperature.
pub const DEFAULT_TAU: f64 = 1e-4;

/// Capacity, temperature and write strength of one memory.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryConfig {
    /// Number of cells.
    pub capacity: usize,
    /// Softmax temperature, > 0.
    pub tau: f64,
    /// Write strength, in (0, 1].
    pub alpha: f64,
}

impl MemoryConfig {
    /// Config with the default temperature and full write strength.
    pub fn new(capacity: usize) -> Self {
        MemoryConfig {
            capacity,
            tau: DEFAULT_TAU,
            alpha: 1.0,
        }
    }

    pub fn with(capacity: usize, tau: f64, alpha: f64) -> Result<Self> {
        let cfg = MemoryConfig {
            capacity,
            tau,
            alpha,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.capacity == 0 {
            return Err(Error::Config("memory capacity must be at least 1".into()));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(Error::Config(format!(
                "temperature must be a positive real, got {}",
                self.tau
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 || self.alpha > 1.0 {
            return Err(Error::Config(format!(
                "write strength must be in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

fn check_address(q: f64, capacity: usize) -> Result<()> {
    if !q.is_finite() || q < 0.0 || q > (capacity - 1) as f64 {
        return Err(Error::AddressOutOfRange { q, capacity });
    }
    Ok(())
}

/// Key vector for a scalar address: a one-hot basis vector at integer
/// addresses, the convex combination of the two adjacent basis vectors at
/// fractional ones.
pub fn key_vector(q: f64, capacity: usize) -> Result<Vec<f64>> {
    check_address(q, capacity)?;
    let mut key = vec![0.0; capacity];
    let lo = q.floor();
    if lo == q {
        key[lo as usize] = 1.0;
    } else {
        let l = lo as usize;
        key[l] = lo + 1.0 - q;
        key[l + 1] = q - lo;
    }
    Ok(key)
}

/// Normalized attention over all cells.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    weights: Vec<f64>,
}

impl AttentionWeights {
    pub fn values(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Softmax of `key_vector(q) / tau`, computed with max-subtraction so the
/// largest logit always maps to exp(0) = 1. Without the subtraction,
/// exp(1/tau) overflows at the default temperature; with it, the off-slot
/// weights of an integer address underflow to exactly 0.0.
pub fn attention(q: f64, cfg: &MemoryConfig) -> Result<AttentionWeights> {
    cfg.validate()?;
    let key = key_vector(q, cfg.capacity)?;
    let mut logits: Vec<f64> = key.iter().map(|k| k / cfg.tau).collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - max).exp();
        sum += *l;
    }
    for l in logits.iter_mut() {
        *l /= sum;
    }
    Ok(AttentionWeights { weights: logits })
}

/// The memory state: one scalar per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryState {
    values: Vec<f64>,
}

impl MemoryState {
    /// All cells zero.
    pub fn new(capacity: usize) -> Self {
        MemoryState {
            values: vec![0.0; capacity],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "memory cell",
                value: bad,
            });
        }
        Ok(MemoryState { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Direct cell access at a known integer address.
    pub fn get(&self, addr: usize) -> Result<f64> {
        self.values.get(addr).copied().ok_or(Error::AddressOutOfRange {
            q: addr as f64,
            capacity: self.values.len(),
        })
    }

    /// Direct cell assignment at a known integer address.
    pub fn set(&mut self, addr: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: "memory cell",
                value,
            });
        }
        let capacity = self.values.len();
        match self.values.get_mut(addr) {
            Some(cell) => {
                *cell = value;
                Ok(())
            }
            None => Err(Error::AddressOutOfRange {
                q: addr as f64,
                capacity,
            }),
        }
    }

    /// Attention-weighted read. When the attention has collapsed to a single
    /// slot this is a hard lookup and returns the cell value bitwise.
    pub fn read(&self, q: f64, cfg: &MemoryConfig) -> Result<f64> {
        let w = attention(q, cfg)?;
        if let Some(a) = w.values().iter().position(|&x| x == 1.0) {
            return Ok(self.values[a]);
        }
        let mut acc = 0.0;
        for (wa, va) in w.values().iter().zip(&self.values) {
            if *wa != 0.0 {
                acc += wa * va;
            }
        }
        Ok(acc)
    }

    /// Convex write: cell a becomes `alpha*w(a)*v + (1 - alpha*w(a))*M(a)`.
    /// Cells with zero attention are left untouched (bitwise), and a cell with
    /// full attention at alpha = 1 becomes exactly `v`.
    pub fn write(&mut self, q: f64, v: f64, cfg: &MemoryConfig) -> Result<()> {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                context: "write value",
                value: v,
            });
        }
        let w = attention(q, cfg)?;
        for (a, &wa) in w.values().iter().enumerate() {
            let g = cfg.alpha * wa;
            if g == 0.0 {
                continue;
            }
            if g == 1.0 {
                self.values[a] = v;
            } else {
                self.values[a] = g * v + (1.0 - g) * self.values[a];
            }
        }
        Ok(())
    }

    /// Attenuates the attended cells toward 0: cell a becomes
    /// `(1 - alpha*w(a))*M(a)`.
    pub fn soft_delete(&mut self, q: f64, cfg: &MemoryConfig) -> Result<()> {
        let w = attention(q, cfg)?;
        for (a, &wa) in w.values().iter().enumerate() {
            let g = cfg.alpha * wa;
            if g == 0.0 {
                continue;
            }
            if g == 1.0 {
                self.values[a] = 0.0;
            } else {
                self.values[a] *= 1.0 - g;
            }
        }
        Ok(())
    }
}
