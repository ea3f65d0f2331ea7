//! Plain-text generating-vector files.
//!
//! ```text
//! # korobov 2 10 2
//! # weights rule j^-3
//! # squared_error 1.7e-4
//! 1 0 1 1
//! 2 0 391 391
//! ```
//!
//! Body lines are `j w_j z_j effective_j`; polynomial components are written
//! as their digit encodings.

use std::fmt::Write as _;

use crate::config::Mode;
use crate::Failure;

#[derive(Clone, Debug, PartialEq)]
pub struct VectorFile {
    pub mode: Mode,
    pub base: u64,
    pub m: u32,
    pub alpha: f64,
    pub weights: String,
    pub squared_error: f64,
    pub reduction: Vec<u32>,
    pub components: Vec<u64>,
    pub effective: Vec<u64>,
}

impl VectorFile {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {} {} {}", self.mode, self.base, self.m, self.alpha);
        let _ = writeln!(out, "# weights {}", self.weights);
        let _ = writeln!(out, "# squared_error {:e}", self.squared_error);
        for (j, ((w, z), e)) in self
            .reduction
            .iter()
            .zip(&self.components)
            .zip(&self.effective)
            .enumerate()
        {
            let _ = writeln!(out, "{} {w} {z} {e}", j + 1);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let bad = |line: usize, what: &str| Failure::Config(format!("vector file line {line}: {what}"));
        let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
        let mut header = |prefix: &str| -> Result<(usize, String), Failure> {
            let (no, line) = lines.next().ok_or_else(|| bad(0, "truncated header"))?;
            line.strip_prefix(prefix)
                .map(|rest| (no, rest.to_string()))
                .ok_or_else(|| bad(no, &format!("expected '{prefix}…'")))
        };
        let (no, first) = header("# ")?;
        let fields: Vec<&str> = first.split(' ').collect();
        let [mode, base, m, alpha] = fields[..] else {
            return Err(bad(no, "expected '# mode b m alpha'"));
        };
        let mode = Mode::parse(mode).ok_or_else(|| bad(no, "unknown mode"))?;
        let base = base.parse().map_err(|_| bad(no, "bad base"))?;
        let m = m.parse().map_err(|_| bad(no, "bad m"))?;
        let alpha = alpha.parse().map_err(|_| bad(no, "bad alpha"))?;
        let (_, weights) = header("# weights ")?;
        let (no, e2) = header("# squared_error ")?;
        let squared_error = e2.parse().map_err(|_| bad(no, "bad squared_error"))?;

        let mut reduction = Vec::new();
        let mut components = Vec::new();
        let mut effective = Vec::new();
        let mut ended = false;
        for (no, line) in lines {
            if line.is_empty() {
                ended = true;
                continue;
            }
            if ended {
                return Err(bad(no, "content after blank line"));
            }
            let fields: Vec<&str> = line.split(' ').collect();
            let [j, w, z, e] = fields[..] else {
                return Err(bad(no, "expected 'j w_j z_j effective_j'"));
            };
            let num = |t: &str| t.parse::<u64>().map_err(|_| bad(no, "expected decimal integers"));
            if num(j)? != components.len() as u64 + 1 {
                return Err(bad(no, "coordinates must be numbered 1, 2, …"));
            }
            let w = u32::try_from(num(w)?).map_err(|_| bad(no, "w_j too large"))?;
            reduction.push(w);
            components.push(num(z)?);
            effective.push(num(e)?);
        }
        if components.is_empty() {
            return Err(bad(0, "no coordinates"));
        }
        Ok(Self {
            mode,
            base,
            m,
            alpha,
            weights,
            squared_error,
            reduction,
            components,
            effective,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_round_trip() {
        let file = VectorFile {
            mode: Mode::Polynomial,
            base: 3,
            m: 4,
            alpha: 1.5,
            weights: "list 1e0 5e-1".into(),
            squared_error: 0.012345678901234567,
            reduction: vec![0, 1],
            components: vec![1, 7],
            effective: vec![1, 21],
        };
        let text = file.render();
        assert!(text.starts_with("# polynomial 3 4 1.5\n"));
        assert_eq!(VectorFile::parse(&text).unwrap(), file);
    }

    #[test]
    fn rejects_malformed_bodies() {
        let head = "# korobov 2 3 2\n# weights rule j^-2\n# squared_error 1e-2\n";
        assert!(VectorFile::parse(&format!("{head}1 0 1\n")).is_err());
        assert!(VectorFile::parse(&format!("{head}2 0 1 1\n")).is_err());
        assert!(VectorFile::parse(&format!("{head}1 0 -1 1\n")).is_err());
        assert!(VectorFile::parse(head).is_err());
        assert!(VectorFile::parse("# cubic 2 3 2\n").is_err());
    }
}
