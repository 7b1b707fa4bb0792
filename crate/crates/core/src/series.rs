//! Per-time entropy records and their CSV form.

use std::fmt::Write as _;

/// Values for one output time. `None` marks a quantity the run did not compute.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntropyRecord {
    pub t: f64,
    pub s1_cl: Option<f64>,
    pub s2_cl: Option<f64>,
    pub i_cl: Option<f64>,
    /// `int P^2(t) / int P^2(0)`, ideally 1.
    pub purity_check: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub s1_q: Option<f64>,
    pub s2_q: Option<f64>,
    pub i_q: Option<f64>,
    pub trunc_pop: Option<f64>,
    pub i_ref: Option<f64>,
    pub icl_ref: Option<f64>,
    /// Monte Carlo estimate when quadrature also ran.
    pub i_cl_mc: Option<f64>,
}

impl EntropyRecord {
    pub fn at(t: f64) -> Self {
        Self {
            t,
            ..Default::default()
        }
    }
}

/// Optional column groups present in a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Columns {
    pub quantum: bool,
    pub trunc_pop: bool,
    pub reference: bool,
    pub mc_compare: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EntropySeries {
    pub records: Vec<EntropyRecord>,
    pub columns: Columns,
}

impl EntropySeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Extracts one column, `NaN` where absent.
    pub fn column(&self, f: impl Fn(&EntropyRecord) -> Option<f64>) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| f(r).unwrap_or(f64::NAN))
            .collect()
    }

    pub fn header(&self) -> String {
        let mut h = String::from("t,S1_cl,S2_cl,I_cl,purity_check,mc_stderr");
        if self.columns.quantum {
            h.push_str(",S1_q,S2_q,I_q");
            if self.columns.trunc_pop {
                h.push_str(",trunc_pop");
            }
        }
        if self.columns.reference {
            h.push_str(",I_ref,Icl_ref");
        }
        if self.columns.mc_compare {
            h.push_str(",I_cl_mc");
        }
        h
    }

    /// CSV text with 12 significant digits and `nan` for missing values.
    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for r in &self.records {
            let mut row = vec![
                Some(r.t),
                r.s1_cl,
                r.s2_cl,
                r.i_cl,
                r.purity_check,
                r.mc_stderr,
            ];
            if self.columns.quantum {
                row.extend([r.s1_q, r.s2_q, r.i_q]);
                if self.columns.trunc_pop {
                    row.push(r.trunc_pop);
                }
            }
            if self.columns.reference {
                row.extend([r.i_ref, r.icl_ref]);
            }
            if self.columns.mc_compare {
                row.push(r.i_cl_mc);
            }
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(&mut out, *v);
            }
            out.push('\n');
        }
        out
    }
}

/// Formats a value with 12 significant digits.
pub fn format_value(v: Option<f64>) -> String {
    let mut s = String::new();
    write_value(&mut s, v);
    s
}

fn write_value(out: &mut String, v: Option<f64>) {
    match v {
        Some(x) if x.is_finite() => {
            // -0 would make otherwise identical runs differ textually
            let x = if x == 0.0 { 0.0 } else { x };
            let _ = write!(out, "{x:.11e}");
        }
        Some(x) if x.is_infinite() => out.push_str(if x > 0.0 { "inf" } else { "-inf" }),
        _ => out.push_str("nan"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_value(Some(0.1)), "1.00000000000e-1");
        assert_eq!(format_value(Some(-0.0)), "0.00000000000e0");
        assert_eq!(format_value(None), "nan");
        let parsed: f64 = format_value(Some(std::f64::consts::PI)).parse().unwrap();
        assert!((parsed - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn header_tracks_columns() {
        let mut s = EntropySeries::default();
        assert_eq!(s.header(), "t,S1_cl,S2_cl,I_cl,purity_check,mc_stderr");
        s.columns = Columns {
            quantum: true,
            trunc_pop: true,
            reference: true,
            mc_compare: false,
        };
        assert_eq!(
            s.header(),
            "t,S1_cl,S2_cl,I_cl,purity_check,mc_stderr,S1_q,S2_q,I_q,trunc_pop,I_ref,Icl_ref"
        );
        s.records.push(EntropyRecord::at(0.5));
        let csv = s.to_csv();
        let row = csv.lines().nth(1).unwrap();
        assert_eq!(row.split(',').count(), 12);
        assert!(row.starts_with("5.00000000000e-1,nan"));
    }
}
