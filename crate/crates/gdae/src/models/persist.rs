//! Textual model persistence.
//!
//! Layout (whitespace-separated tokens, reals at full round-trip precision):
//!
//! ```text
//! GDAE-MODEL v1
//! table                     | parzen                     | mlp
//! <k> <alpha>               | <n> <d> <sigma_x> <sigma_c>| <d> <h>
//! k rows of k counts        | n lines of x_i then x~_i   | W1 rows, b1, W2 rows, b2
//! ```

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{BernoulliMlp, ConditionalModel, MultinomialTable, ParzenConditional};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &str = "GDAE-MODEL v1";

/// 17 significant digits: enough to round-trip any f64 exactly.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_model<W: Write>(model: &ConditionalModel, out: &mut W) -> Result<()> {
    writeln!(out, "{MODEL_MAGIC}")?;
    writeln!(out, "{}", model.family_name())?;
    match model {
        ConditionalModel::Multinomial(t) => {
            writeln!(out, "{} {}", t.k(), fmt(t.alpha()))?;
            for xt in 0..t.k() {
                let row: Vec<String> = (0..t.k()).map(|x| fmt(t.count(xt, x))).collect();
                writeln!(out, "{}", row.join(" "))?;
            }
        }
        ConditionalModel::Parzen(p) => {
            writeln!(
                out,
                "{} {} {} {}",
                p.len(),
                p.dim(),
                fmt(p.sigma_x()),
                fmt(p.sigma_c())
            )?;
            for (x, xt) in p.anchors() {
                let tokens: Vec<String> = x.iter().chain(xt).map(|&v| fmt(v)).collect();
                writeln!(out, "{}", tokens.join(" "))?;
            }
        }
        ConditionalModel::BernoulliMlp(m) => {
            let (d, h) = m.dims();
            writeln!(out, "{d} {h}")?;
            let (w1, b1, w2, b2) = m.params();
            for i in 0..h {
                let row: Vec<String> = w1[i * d..(i + 1) * d].iter().map(|&v| fmt(v)).collect();
                writeln!(out, "{}", row.join(" "))?;
            }
            writeln!(out, "{}", b1.iter().map(|&v| fmt(v)).collect::<Vec<_>>().join(" "))?;
            for j in 0..d {
                let row: Vec<String> = w2[j * h..(j + 1) * h].iter().map(|&v| fmt(v)).collect();
                writeln!(out, "{}", row.join(" "))?;
            }
            writeln!(out, "{}", b2.iter().map(|&v| fmt(v)).collect::<Vec<_>>().join(" "))?;
        }
    }
    Ok(())
}

pub fn save_model(model: &ConditionalModel, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_model(model, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

struct Tokens {
    tokens: Vec<String>,
    pos: usize,
}

impl Tokens {
    fn next(&mut self) -> Result<&str> {
        let t = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| Error::ModelFormat("unexpected end of model file".to_string()))?;
        self.pos += 1;
        Ok(t)
    }

    fn next_usize(&mut self) -> Result<usize> {
        let t = self.next()?;
        t.parse()
            .map_err(|_| Error::ModelFormat(format!("expected an integer, got `{t}`")))
    }

    fn next_f64(&mut self) -> Result<f64> {
        let t = self.next()?;
        t.parse()
            .map_err(|_| Error::ModelFormat(format!("expected a real, got `{t}`")))
    }

    fn finished(&self) -> bool {
        self.pos == self.tokens.len()
    }
}

pub fn read_model<R: Read>(input: R) -> Result<ConditionalModel> {
    let mut reader = BufReader::new(input);
    let mut magic = String::new();
    reader.read_line(&mut magic)?;
    if magic.trim_end() != MODEL_MAGIC {
        return Err(Error::ModelFormat(format!(
            "bad magic line `{}`, expected `{MODEL_MAGIC}`",
            magic.trim_end()
        )));
    }
    let mut family = String::new();
    reader.read_line(&mut family)?;
    let family = family.trim().to_string();

    let mut rest = String::new();
    reader.read_to_string(&mut rest)?;
    let mut toks = Tokens {
        tokens: rest.split_whitespace().map(str::to_string).collect(),
        pos: 0,
    };

    let model = match family.as_str() {
        "table" => {
            let k = toks.next_usize()?;
            let alpha = toks.next_f64()?;
            let mut counts = Vec::with_capacity(k * k);
            for _ in 0..k * k {
                counts.push(toks.next_f64()?);
            }
            ConditionalModel::Multinomial(MultinomialTable::from_counts(counts, k, alpha)?)
        }
        "parzen" => {
            let n = toks.next_usize()?;
            let d = toks.next_usize()?;
            let sigma_x = toks.next_f64()?;
            let sigma_c = toks.next_f64()?;
            let mut xs = Vec::with_capacity(n);
            let mut xts = Vec::with_capacity(n);
            for _ in 0..n {
                let mut x = Vec::with_capacity(d);
                for _ in 0..d {
                    x.push(toks.next_f64()?);
                }
                let mut xt = Vec::with_capacity(d);
                for _ in 0..d {
                    xt.push(toks.next_f64()?);
                }
                xs.push(x);
                xts.push(xt);
            }
            ConditionalModel::Parzen(ParzenConditional::new(xs, xts, sigma_x, sigma_c)?)
        }
        "mlp" => {
            let d = toks.next_usize()?;
            let h = toks.next_usize()?;
            let mut read_vec = |n: usize| -> Result<Vec<f64>> {
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    v.push(toks.next_f64()?);
                }
                Ok(v)
            };
            let w1 = read_vec(h * d)?;
            let b1 = read_vec(h)?;
            let w2 = read_vec(d * h)?;
            let b2 = read_vec(d)?;
            ConditionalModel::BernoulliMlp(BernoulliMlp::from_parts(w1, b1, w2, b2, d, h)?)
        }
        other => {
            return Err(Error::ModelFormat(format!(
                "unknown model family `{other}`"
            )))
        }
    };

    if !toks.finished() {
        return Err(Error::ModelFormat(format!(
            "{} trailing tokens after model body",
            toks.tokens.len() - toks.pos
        )));
    }
    Ok(model)
}

pub fn load_model(path: &Path) -> Result<ConditionalModel> {
    let file = fs::File::open(path).map_err(|e| {
        Error::Data(format!("cannot open model file {}: {e}", path.display()))
    })?;
    read_model(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RngStream;
    use crate::models::fit_multinomial;

    fn round_trip(model: &ConditionalModel) -> ConditionalModel {
        let mut buf = Vec::new();
        write_model(model, &mut buf).unwrap();
        read_model(&buf[..]).unwrap()
    }

    #[test]
    fn table_round_trips_exactly() {
        let t = fit_multinomial(&[(0, 1), (2, 2), (1, 0), (1, 0)], 3, 0.1).unwrap();
        let m = ConditionalModel::Multinomial(t);
        assert_eq!(round_trip(&m), m);
    }

    #[test]
    fn parzen_round_trips_exactly() {
        let p = ParzenConditional::new(
            vec![vec![0.1, -2.5e-13], vec![1.0 / 3.0, 7.25]],
            vec![vec![0.0, 0.5], vec![-0.25, 1e17]],
            0.123456789012345,
            2.5,
        )
        .unwrap();
        let m = ConditionalModel::Parzen(p);
        assert_eq!(round_trip(&m), m);
    }

    #[test]
    fn mlp_round_trips_exactly() {
        let mut rng = RngStream::new(5, 0);
        let mlp = BernoulliMlp::new(4, 3, &mut rng).unwrap();
        let m = ConditionalModel::BernoulliMlp(mlp);
        assert_eq!(round_trip(&m), m);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let text = b"GDAE-MODEL v2\ntable\n2 0\n1 0\n0 1\n";
        assert!(matches!(
            read_model(&text[..]),
            Err(Error::ModelFormat(_))
        ));
    }

    #[test]
    fn truncated_body_is_rejected() {
        let text = b"GDAE-MODEL v1\ntable\n3 0.1\n1 0 0\n";
        assert!(matches!(
            read_model(&text[..]),
            Err(Error::ModelFormat(_))
        ));
    }

    #[test]
    fn trailing_tokens_are_rejected()  {
        let text = b"GDAE-MODEL v1\ntable\n2 0\n1 0\n0 1\n42\n";
        assert!(matches!(
            read_model(&text[..]),
            Err(Error::ModelFormat(_))
        ));
    }
}
