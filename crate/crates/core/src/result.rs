use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Analytic => "analytic",
            Method::MonteCarlo => "monte-carlo",
        })
    }
}

/// Outcome of one test. Monte Carlo results always carry the replication
/// count and master seed they were computed with.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    pub df: Option<u64>,
    pub p_value: f64,
    pub method: Method,
    pub mc_reps: Option<usize>,
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
}

impl TestResult {
    pub fn analytic(test_name: &str, statistic: f64, df: Option<u64>, p_value: f64) -> Self {
        TestResult {
            test_name: test_name.to_string(),
            statistic,
            df,
            p_value: p_value.clamp(0.0, 1.0),
            method: Method::Analytic,
            mc_reps: None,
            seed: None,
            warnings: Vec::new(),
        }
    }

    pub fn monte_carlo(
        test_name: &str,
        statistic: f64,
        df: Option<u64>,
        p_value: f64,
        reps: usize,
        seed: u64,
    ) -> Self {
        TestResult {
            test_name: test_name.to_string(),
            statistic,
            df,
            p_value,
            method: Method::MonteCarlo,
            mc_reps: Some(reps),
            seed: Some(seed),
            warnings: Vec::new(),
        }
    }

    pub fn with_warning(mut self, warning: impl Into<String>) -> Self {
        self.warnings.push(warning.into());
        self
    }

    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}
