//! Text formatting for emitted files. Reals are written with 17 significant
//! digits so every value round-trips through any IEEE-754 parser.

use std::fmt::Display;

pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_owned()
    } else if x > 0.0 {
        "inf".to_owned()
    } else {
        "-inf".to_owned()
    }
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub fn opt<T: Display>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// A CSV table built in memory; rows are written in insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csv {
    header: &'static str,
    rows: Vec<String>,
}

impl Csv {
    pub fn new(header: &'static str) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.header.split(',').count());
        self.rows.push(fields.join(","));
    }

    pub fn header(&self) -> &str {
        self.header
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::with_capacity(self.header.len() + 1 + self.rows.iter().map(|r| r.len() + 1).sum::<usize>());
        s.push_str(self.header);
        s.push('\n');
        for r in &self.rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }
}
