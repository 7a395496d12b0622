//! Benchmark result rows and their CSV form.

use std::fmt;

/// Versioned CSV schema; tests pin this string.
pub const CSV_HEADER: &str =
    "problem,N,method,eps,mem_bytes,e_a,e_s,n_i_mean,factor_s,solve_s,warm_start,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Phif,
    Ichol,
    None,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Phif => "phif",
            Method::Ichol => "ichol",
            Method::None => "none",
        })
    }
}

/// One benchmark row: a (problem, method, tolerance) triple with its
/// measured metrics. `eps` is the drop tolerance for ichol rows and absent
/// for unpreconditioned ones; `e_a`/`e_s` are reported for phif only.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub problem: String,
    pub n_dofs: usize,
    pub method: Method,
    pub eps: Option<f64>,
    pub mem_bytes: usize,
    pub e_a: Option<f64>,
    pub e_s: Option<f64>,
    pub n_i_mean: f64,
    pub factor_s: f64,
    pub solve_s: f64,
    pub warm_start: bool,
    pub seed: u64,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.problem,
            self.n_dofs,
            self.method,
            opt(self.eps),
            self.mem_bytes,
            opt(self.e_a),
            opt(self.e_s),
            self.n_i_mean,
            self.factor_s,
            self.solve_s,
            self.warm_start,
            self.seed
        )
    }

    /// The row with the timing columns blanked, for determinism comparisons.
    pub fn csv_row_untimed(&self) -> String {
        let mut fields: Vec<String> =
            self.csv_row().split(',').map(str::to_string).collect();
        fields[8].clear();
        fields[9].clear();
        fields.join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        RunReport {
            problem: "heat2d_n16".into(),
            n_dofs: 225,
            method: Method::Phif,
            eps: Some(1e-3),
            mem_bytes: 123456,
            e_a: Some(3.25e-4),
            e_s: Some(5.5e-3),
            n_i_mean: 4.6,
            factor_s: 0.5,
            solve_s: 1.25,
            warm_start: true,
            seed: 0,
        }
    }

    #[test]
    fn header_is_pinned() {
        assert_eq!(
            CSV_HEADER,
            "problem,N,method,eps,mem_bytes,e_a,e_s,n_i_mean,factor_s,solve_s,warm_start,seed"
        );
        assert_eq!(CSV_HEADER.split(',').count(), sample().csv_row().split(',').count());
    }

    #[test]
    fn phif_row_round_trips_fields() {
        let row = sample().csv_row();
        assert_eq!(
            row,
            "heat2d_n16,225,phif,0.001,123456,0.000325,0.0055,4.6,0.5,1.25,true,0"
        );
    }

    #[test]
    fn none_method_blanks_optional_columns() {
        let mut r = sample();
        r.method = Method::None;
        r.eps = None;
        r.e_a = None;
        r.e_s = None;
        let row = r.csv_row();
        assert_eq!(row, "heat2d_n16,225,none,,123456,,,4.6,0.5,1.25,true,0");
    }

    #[test]
    fn untimed_row_drops_only_timings() {
        let a = sample();
        let mut b = sample();
        b.factor_s = 99.0;
        b.solve_s = 0.001;
        assert_ne!(a.csv_row(), b.csv_row());
        assert_eq!(a.csv_row_untimed(), b.csv_row_untimed());
        assert!(a.csv_row_untimed().contains("4.6"));
    }
}
