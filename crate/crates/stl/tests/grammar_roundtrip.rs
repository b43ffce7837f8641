mod common;

use common::{random_formula, rng};
use mirage_stl::{format_formula, parse_formula, StlError, StlFormula};

#[test]
fn parse_of_format_is_identity_on_asts() {
    let mut r = rng(21);
    for case in 0..1000 {
        let phi = random_formula(&mut r, 4, 12);
        let text = format_formula(&phi);
        let back = parse_formula(&text).unwrap_or_else(|e| panic!("case {case}: {e}\n{text}"));
        assert_eq!(back, phi, "case {case} failed on {text}");
    }
}

#[test]
fn format_of_parse_is_canonical() {
    let mut r = rng(22);
    for _ in 0..200 {
        let phi = random_formula(&mut r, 3, 10);
        let text = format_formula(&phi);
        let canon = format_formula(&parse_formula(&text).unwrap());
        assert_eq!(canon, text);
    }
}

#[test]
fn always_example_structure() {
    let phi = parse_formula("G[30,31](0.4111*x - 0.3976*y + 3.8745 > 0)").unwrap();
    match phi {
        StlFormula::Always { k1: 30, k2: 31, child } => match *child {
            StlFormula::Predicate { a, b } => {
                assert_eq!(a, [0.4111, -0.3976, 0.0]);
                assert_eq!(b, -3.8745);
            }
            other => panic!("unexpected child {other:?}"),
        },
        other => panic!("unexpected root {other:?}"),
    }
}

#[test]
fn conjunction_of_two_branches() {
    let phi = parse_formula(
        "F[0,1](-0.4278*x + 0.1899*y - 3.2133 > 0) & G[35,36](1*v - 8 > 0)",
    )
    .unwrap();
    match phi {
        StlFormula::And(children) => {
            assert_eq!(children.len(), 2);
            assert!(matches!(children[0], StlFormula::Eventually { k1: 0, k2: 1, .. }));
            assert!(matches!(children[1], StlFormula::Always { k1: 35, k2: 36, .. }));
        }
        other => panic!("unexpected root {other:?}"),
    }
}

#[test]
fn precedence_and_grouping() {
    let phi = parse_formula("1*x > 0 & 1*y > 0 | 1*v > 0").unwrap();
    assert!(matches!(&phi, StlFormula::Or(cs) if cs.len() == 2));
    let grouped = parse_formula("1*x > 0 & (1*y > 0 | 1*v > 0)").unwrap();
    assert!(matches!(&grouped, StlFormula::And(cs) if cs.len() == 2));
}

#[test]
fn syntax_errors_carry_positions() {
    match parse_formula("G[30,31](0.4111*q > 0)") {
        Err(StlError::Syntax { pos, .. }) => assert_eq!(pos, 16),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        parse_formula("G[3,1](1*x > 0)"),
        Err(StlError::InvalidFormula(_))
    ));
    assert!(matches!(
        parse_formula("G[1.5,2](1*x > 0)"),
        Err(StlError::Syntax { .. })
    ));
    assert!(matches!(parse_formula("1*x > 0 extra"), Err(StlError::Syntax { .. })));
    assert!(matches!(parse_formula("1*x > 1"), Err(StlError::Syntax { .. })));
}
