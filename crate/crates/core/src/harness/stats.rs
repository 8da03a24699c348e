/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
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

/// Per-trial samples of one scheme at one grid point.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    n: usize,
    rate: CompensatedSum,
    power: CompensatedSum,
    ee: CompensatedSum,
    ee_sq: CompensatedSum,
}

impl Accumulator {
    pub fn push(&mut self, sum_rate: f64, total_power: f64) {
        let ee = sum_rate / total_power;
        self.n += 1;
        self.rate.add(sum_rate);
        self.power.add(total_power);
        self.ee.add(ee);
        self.ee_sq.add(ee * ee);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean_rate(&self) -> f64 {
        self.rate.value() / self.n as f64
    }

    pub fn mean_power(&self) -> f64 {
        self.power.value() / self.n as f64
    }

    pub fn mean_ee(&self) -> f64 {
        self.ee.value() / self.n as f64
    }

    /// Standard error of the per-trial EE.
    pub fn ee_stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let mean = self.mean_ee();
        let var = ((self.ee_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}
