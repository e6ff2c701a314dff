//! Core language: abstract syntax, values, machine states, parser, and
//! pretty-printer.

pub mod ast;
pub mod parse;
pub mod print;
pub mod state;

pub use ast::{Command, Expr, FunDef, Lval, Op, Program, Value, Var};
pub use parse::{parse, parse_cmd, parse_expr, ParseError};
pub use print::{pretty, pretty_cmd, pretty_expr, render_value};
pub use state::{MachState, Mem};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_assignment() {
        let p = parse("fn main() -> x { x = 3; }").unwrap();
        assert_eq!(p.funs.len(), 1);
        let f = &p.funs[0];
        assert_eq!(f.name, "main");
        assert_eq!(f.param, None);
        assert_eq!(f.result, "x");
        assert_eq!(f.body, Command::Assign(Lval::var("x"), Expr::word(3)));
    }

    #[test]
    fn parses_rand_syntax() {
        let p = parse("fn f() -> y { y =$ 1; }").unwrap();
        assert_eq!(p.funs[0].body, Command::Rand(Lval::var("y"), Expr::word(1)));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse("fn f() -> y { x = ; }").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => {
                assert_eq!(line, 1);
                assert_eq!(col, 19);
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_unknown_functions_rejected() {
        let err = parse("fn f() -> x { skip; } fn f() -> y { skip; }").unwrap_err();
        assert_eq!(err, ParseError::DuplicateFunction { name: "f".into() });
        let err = parse("fn f() -> x { x = g(1); }").unwrap_err();
        assert!(matches!(err, ParseError::UnknownFunction { ref name, .. } if name == "g"));
    }

    #[test]
    fn equality_accepts_both_spellings() {
        assert_eq!(parse_expr("x = x").unwrap(), parse_expr("x == x").unwrap());
    }

    #[test]
    fn precedence_is_c_like() {
        let e = parse_expr("a + b * c < d && !e").unwrap();
        assert_eq!(
            e,
            Expr::bin(
                Op::And,
                Expr::bin(
                    Op::Lt,
                    Expr::bin(Op::Add, Expr::var("a"), Expr::bin(Op::Mul, Expr::var("b"), Expr::var("c"))),
                    Expr::var("d")
                ),
                Expr::App(Op::Not, vec![Expr::var("e")])
            )
        );
    }

    #[test]
    fn fresh_names_with_hash_survive_round_trips() {
        let src = "fn f(a) -> r {\n    a#1 = a + 1; # trailing comment\n    r = a#1;\n}";
        let p = parse(src).unwrap();
        assert_eq!(parse(&pretty(&p)).unwrap(), p);
    }

    #[test]
    fn nested_control_flow_round_trips() {
        let src = r#"
fn main(n) -> r {
    r = 0;
    while r < n {
        if r == 2 || n <= 1 {
            (r, n) = (r + 1, n - 1);
        } else {
            r = r * 2;
        }
        [r + 100] = 7;
        r = main(r - 1);
    }
    b[0] =$ 2;
}
"#;
        let p = parse(src).unwrap();
        let printed = pretty(&p);
        assert_eq!(parse(&printed).unwrap(), p);
        // Canonical printing is a fixpoint.
        assert_eq!(pretty(&parse(&printed).unwrap()), printed);
    }

    #[test]
    fn tuple_lvals_do_not_nest() {
        let err = parse_cmd("((x, y), z) = (1, 2);").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn empty_call_argument_is_unit() {
        let p = parse("fn g() -> y { y = 1; } fn f() -> x { x = g(); }").unwrap();
        assert_eq!(
            p.funs[1].body,
            Command::Call(Lval::var("x"), "g".into(), Expr::Tuple(Vec::new()))
        );
        assert_eq!(parse(&pretty(&p)).unwrap(), p);
    }
}
