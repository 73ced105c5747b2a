//! Built-in methods.

use crate::error::{Error, Result};
use crate::scalar::{int, parse_rational, rat, Rational};

use super::{ButcherTableau, Tableau};

/// Two-stage second-order family with `c₂ = α`.
pub fn rk22(alpha: Rational) -> ButcherTableau<Rational> {
    let one = int(1);
    let b2 = &one / (int(2) * &alpha);
    let name = format!("RK22({alpha})");
    ButcherTableau::new(
        name,
        vec![vec![], vec![alpha.clone()]],
        vec![&one - &b2, b2],
        Some(vec![int(0), alpha]),
    )
    .expect("α ≠ 0")
}

pub fn pep223() -> ButcherTableau<Rational> {
    rk22(rat(2, 3)).with_name("PEP(2,2,3)").with_claim(2, 3)
}

pub fn pep324() -> ButcherTableau<Rational> {
    ButcherTableau::new(
        "PEP(3,2,4)",
        vec![vec![], vec![rat(1, 3)], vec![rat(-5, 48), rat(15, 16)]],
        vec![rat(1, 10), rat(1, 2), rat(2, 5)],
        Some(vec![int(0), rat(1, 3), rat(5, 6)]),
    )
    .expect("valid")
    .with_claim(2, 4)
}

pub fn pep425() -> ButcherTableau<Rational> {
    ButcherTableau::new(
        "PEP(4,2,5)",
        vec![
            vec![],
            vec![rat(1, 10)],
            vec![rat(-35816, 35721), rat(56795, 35721)],
            vec![rat(11994761, 5328000), rat(-11002961, 4420800), rat(215846127, 181744000)],
        ],
        vec![rat(-17, 222), rat(6250, 15657), rat(5250987, 10382126), rat(4000, 23307)],
        // the published abscissae list 19/20 and 37/63 in the opposite order
        // to the row sums; c is taken from A
        None,
    )
    .expect("valid")
    .with_claim(2, 5)
}

fn float(name: &str, a: &[&[f64]], b: &[f64], c: &[f64], claim: (usize, usize)) -> ButcherTableau<f64> {
    ButcherTableau::new(
        name,
        a.iter().map(|r| r.to_vec()).collect(),
        b.to_vec(),
        Some(c.to_vec()),
    )
    .expect("valid")
    .with_claim(claim.0, claim.1)
}

// The float tableaus below are the published coefficients, digit for digit.

pub fn pep526() -> ButcherTableau<f64> {
    float(
        "PEP(5,2,6)",
        &[
            &[],
            &[0.193445628056365],
            &[-0.090431947690469, 0.646659568003039],
            &[-0.059239621354435, 0.598571867726670, -0.010476084304794],
            &[0.173154586278662, 0.043637751980064, 0.949323298732961, -0.262838451019868],
        ],
        &[0.054828314201395, 0.310080077556546, 0.531276882919990, -0.135494569336049, 0.239309294658118],
        &[0.0, 0.193445628056365, 0.55622762031257, 0.528856162067441, 0.9032771859718189],
        (2, 6),
    )
}

pub fn pep636() -> ButcherTableau<f64> {
    float(
        "PEP(6,3,6)",
        &[
            &[],
            &[0.12316523079127038],
            &[-0.53348119048187126, 1.1200645707708279],
            &[0.35987162974687092, -0.17675778446586507, 0.7331973326225617],
            &[0.015700424346522388, 0.02862938097533644, -0.014047147149911631, -0.015653338246176568],
            &[
                -1.9608805853984794,
                -0.82154709029385564,
                -0.0033631561953843502,
                0.046367461001250457,
                2.782035718578454,
            ],
        ],
        &[
            0.78642719559722885,
            0.69510370728230297,
            0.42190724518033551,
            0.21262030193155254,
            -0.70167978222250704,
            -0.41437866776891263,
        ],
        &[
            0.0,
            0.12316523079127044,
            0.58658338028895673,
            0.91631117790356775,
            0.014629319925770667,
            0.042612347691984923,
        ],
        (3, 6),
    )
}

pub fn pep746() -> ButcherTableau<f64> {
    float(
        "PEP(7,4,6)",
        &[
            &[],
            &[-0.10731260966924323],
            &[0.14772934954602848, -0.12537555684690285],
            &[0.7016079790308741, -0.75094597518803941, 0.76631666070124027],
            &[-0.8967481787471202, -0.43795858531068965, 1.7727346351832869, 0.1706052810617312],
            &[
                1.6243872270239892,
                -0.69700589895015241,
                -0.3861309831750398,
                -0.032848941899304235,
                0.30227620385295728,
            ],
            &[
                -0.32463926305048885,
                -0.3480143346241919,
                1.3500419757109139,
                0.039096802121597336,
                -0.17851883247877129,
                0.010142489530892661,
            ],
        ],
        &[
            -0.69203318482299292,
            0.0074442860308153933,
            0.93216717844052677,
            -1.159431111205361,
            0.27787978605406632,
            0.93890392164164138,
            0.69506912386130404,
        ],
        &[
            0.0,
            -0.10731260966924323,
            0.022353792699125609,
            0.71697866454407488,
            0.60863315218720804,
            0.81067760685245005,
            0.54810883720995185,
        ],
        (4, 6),
    )
}

pub fn pep756() -> ButcherTableau<f64> {
    float(
        "PEP(7,5,6)",
        &[
            &[],
            &[0.34288981581855521],
            &[0.16800230418143236, 0.1262987524809161],
            &[0.4326925567104672, -0.24221982610439177, 0.15241708521248304],
            &[0.019843989305203335, 0.20330206481276515, -0.3494376489494413, 0.09780248603799992],
            &[
                3.5441758455721732,
                9.884560134482289,
                -3.7993663287883006,
                -6.07804112569088,
                -2.820029405964353,
            ],
            &[
                -16.625817935606782,
                -49.999620978741511,
                22.3661445506308,
                30.50526767511958,
                13.408435545803448,
                1.3455911427944685,
            ],
        ],
        &[
            0.15881394125505754,
            3.390357323579911e-13,
            0.4109696726168125,
            -1.6409254928717294E-13,
            -0.056173857997504642,
            0.40542999348169673,
            0.08096025064376304,
        ],
        &[
            0.0,
            0.34288981581855521,
            // printed as 0.2943010566234846, one digit short of its row sum
            0.29430105666234846,
            0.34288981581855849,
            -0.028489108793472939,
            0.73129911961092908,
            1.0000000000000007,
        ],
        (5, 6),
    )
}

/// Kutta's third-order method.
pub fn rk33() -> ButcherTableau<Rational> {
    ButcherTableau::new(
        "RK(3,3)",
        vec![vec![], vec![rat(1, 2)], vec![int(-1), int(2)]],
        vec![rat(1, 6), rat(2, 3), rat(1, 6)],
        None,
    )
    .expect("valid")
    .with_claim(3, 3)
}

/// The classical fourth-order method.
pub fn rk44() -> ButcherTableau<Rational> {
    ButcherTableau::new(
        "RK(4,4)",
        vec![vec![], vec![rat(1, 2)], vec![int(0), rat(1, 2)], vec![int(0), int(0), int(1)]],
        vec![rat(1, 6), rat(1, 3), rat(1, 3), rat(1, 6)],
        None,
    )
    .expect("valid")
    .with_claim(4, 4)
}

/// Every built-in method. `RK22(1/2)` stands in for the whole family.
pub fn registry() -> Vec<Tableau> {
    vec![
        rk22(rat(1, 2)).with_claim(2, 2).into(),
        pep223().into(),
        pep324().into(),
        pep425().into(),
        pep526().into(),
        pep636().into(),
        pep746().into(),
        pep756().into(),
        rk33().into(),
        rk44().into(),
    ]
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | ',' | '_' | '-'))
        .collect::<String>()
        .to_ascii_uppercase()
}

/// Finds a method by name. Spacing, case and punctuation are ignored, so
/// `PEP(4,2,5)`, `pep425` and `PEP 4 2 5` are the same method. The two-stage
/// family accepts a parameter: `RK22(2/3)`, `RK22(0.75)`; plain `RK22` or
/// `RK(2,2)` means `α = 1/2`.
pub fn lookup(name: &str) -> Result<Tableau> {
    let trimmed = name.trim();
    let upper = trimmed.to_ascii_uppercase();
    if let Some(rest) = upper.strip_prefix("RK22(") {
        let arg = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::UnknownMethod(name.to_string()))?;
        let alpha = parse_rational(arg).ok_or_else(|| Error::Parse(format!("bad α in {name:?}")))?;
        if num_traits::Zero::is_zero(&alpha) {
            return Err(Error::Domain("α must be nonzero".into()));
        }
        let mut t = rk22(alpha.clone());
        if alpha == rat(2, 3) {
            t = t.with_claim(2, 3);
        }
        return Ok(t.into());
    }
    let key = normalize(trimmed);
    if key == "RK22" {
        return Ok(rk22(rat(1, 2)).with_claim(2, 2).into());
    }
    registry()
        .into_iter()
        .find(|t| normalize(t.name()) == key)
        .ok_or_else(|| Error::UnknownMethod(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_variants() {
        assert_eq!(lookup("pep425").unwrap().name(), "PEP(4,2,5)");
        assert_eq!(lookup("PEP(4, 2, 5)").unwrap().name(), "PEP(4,2,5)");
        assert_eq!(lookup("RK(2,2)").unwrap().name(), "RK22(1/2)");
        assert_eq!(lookup("rk44").unwrap().name(), "RK(4,4)");
        assert_eq!(lookup("RK22(0.75)").unwrap().name(), "RK22(3/4)");
        assert!(lookup("RK22(0)").is_err());
        assert!(matches!(lookup("nope"), Err(Error::UnknownMethod(_))));
    }

    #[test]
    fn family_member_matches_named_method() {
        let Tableau::Exact(t) = lookup("RK22(2/3)").unwrap() else {
            panic!()
        };
        let p = pep223();
        assert_eq!((t.a_matrix(), t.b(), t.c()), (p.a_matrix(), p.b(), p.c()));
    }

    #[test]
    fn published_entries() {
        assert_eq!(pep425().c(), &[int(0), rat(1, 10), rat(37, 63), rat(19, 20)]);
        assert_eq!(pep425().b()[0], rat(-17, 222));
        assert_eq!(pep425().b()[3], rat(4000, 23307));
        assert_eq!(pep324().a(2, 0), &rat(-5, 48));
    }

    #[test]
    fn all_registry_methods_are_consistent() {
        for t in registry() {
            let issues = match &t {
                Tableau::Exact(x) => x.consistency_issues(),
                Tableau::Float(x) => x.consistency_issues(),
            };
            assert!(issues.is_empty(), "{}: {issues:?}", t.name());
        }
    }
}
