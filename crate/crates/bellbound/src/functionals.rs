//! Named Bell functionals bundled with the toolkit.
//!
//! The CGLMP family is standard literature data, not something derived here;
//! it is shipped so that multi-outcome scenarios have a well-known test case.

use crate::error::{Error, Result};
use crate::scenario::{BellFunctional, Scenario};

/// `<a1 b1> + <a1 b2> + <a2 b1> - <a2 b2>` on `{+1,-1}` outcomes.
pub fn chsh() -> BellFunctional {
    let sc = Scenario::dichotomic(2, 2).expect("static scenario");
    BellFunctional::correlator(
        &sc,
        &[(vec![0, 0], 1.0), (vec![0, 1], 1.0), (vec![1, 0], 1.0), (vec![1, 1], -1.0)],
    )
    .expect("static functional")
}

/// Mermin functional on `n` parties: the imaginary part of
/// `prod_k (a_k^(1) + i a_k^(2))` expanded into correlators.
///
/// For three parties this is `<a1b1c2> + <a1b2c1> + <a2b1c1> - <a2b2c2>`.
pub fn mermin(n: usize) -> Result<BellFunctional> {
    if n < 2 {
        return Err(Error::InvalidFunctional("mermin needs at least two parties".into()));
    }
    let sc = Scenario::dichotomic(n, 2)?;
    let mut terms = Vec::new();
    for mask in 0..(1usize << n) {
        let second = mask.count_ones() as usize;
        let c = match second % 4 {
            1 => 1.0,
            3 => -1.0,
            _ => continue,
        };
        let settings = (0..n).map(|k| (mask >> (n - 1 - k)) & 1).collect();
        terms.push((settings, c));
    }
    BellFunctional::correlator(&sc, &terms)
}

/// The CGLMP functional for two parties, two settings and `d` outcomes
/// labelled `0..d`. Its LHV maximum is 2.
pub fn cglmp(d: usize) -> Result<BellFunctional> {
    if d < 2 {
        return Err(Error::InvalidFunctional("cglmp needs at least two outcomes".into()));
    }
    let sc = Scenario::labelled(vec![2, 2], &[d, d])?;
    let mut f = BellFunctional::zero(&sc);
    let di = d as i64;
    // Adds `c` to every P(x, y | sa, sb) with x - y = shift (mod d).
    let mut relation = |sa: usize, sb: usize, shift: i64, c: f64| -> Result<()> {
        for x in 0..d {
            let y = ((x as i64 - shift).rem_euclid(di)) as usize;
            f.add_term(&[sa, sb], &[x, y], c)?;
        }
        Ok(())
    };
    for k in 0..(d / 2) as i64 {
        let w = if d > 2 { 1.0 - 2.0 * k as f64 / (di - 1) as f64 } else { 1.0 };
        relation(0, 0, k, w)?;
        relation(1, 0, -(k + 1), w)?;
        relation(1, 1, k, w)?;
        relation(0, 1, -k, w)?;
        relation(0, 0, -(k + 1), -w)?;
        relation(1, 0, k, -w)?;
        relation(1, 1, -(k + 1), -w)?;
        relation(0, 1, k + 1, -w)?;
    }
    Ok(f)
}

/// Parses the shorthands `chsh`, `mermin:N` and `cglmp:d`.
pub fn named(spec: &str) -> Result<BellFunctional> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let number = |a: Option<&str>| -> Result<usize> {
        let a = a.ok_or_else(|| Error::Parse(format!("`{spec}` needs a numeric argument")))?;
        let a = a.trim_start_matches("N=").trim_start_matches("d=");
        a.parse().map_err(|_| Error::Parse(format!("bad argument in `{spec}`")))
    };
    match name {
        "chsh" => Ok(chsh()),
        "mermin" => mermin(arg.map_or(Ok(3), |a| number(Some(a)))?),
        "cglmp" => cglmp(number(arg)?),
        _ => Err(Error::Parse(format!("unknown functional `{spec}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mermin_three_has_four_terms() {
        let f = mermin(3).unwrap();
        let sc = f.scenario();
        let mut nonzero = Vec::new();
        for st in 0..sc.setting_tuples() {
            let tuple = sc.setting_tuple(st);
            // coefficient on the all-(+1) outcome equals the correlator weight
            let c = f.coefficient(&tuple, &[0, 0, 0]);
            if c != 0.0 {
                nonzero.push((tuple, c));
            }
        }
        assert_eq!(
            nonzero,
            vec![
                (vec![0, 0, 1], 1.0),
                (vec![0, 1, 0], 1.0),
                (vec![1, 0, 0], 1.0),
                (vec![1, 1, 1], -1.0)
            ]
        );
    }

    #[test]
    fn named_shorthands() {
        assert_eq!(named("chsh").unwrap(), chsh());
        assert_eq!(named("mermin:3").unwrap(), mermin(3).unwrap());
        assert_eq!(named("cglmp:3").unwrap(), cglmp(3).unwrap());
        assert!(named("foo").is_err());
        assert!(named("cglmp").is_err());
    }
}
