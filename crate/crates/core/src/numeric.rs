//! Small floating-point helpers shared across modules.

/// Neumaier's variant of Kahan compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// Harmonic number `H_k`, summed from the small end.
pub fn harmonic(k: u64) -> f64 {
    compensated_sum((1..=k).rev().map(|i| 1.0 / i as f64))
}

/// `ln k!` by summation for small `k` and `ln_gamma` beyond.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else if k <= 170 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        statrs::function::gamma::ln_gamma(k as f64 + 1.0)
    }
}
