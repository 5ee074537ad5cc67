use filippov_lab::parser::{parse_field_expression, BinaryOp, Expr, Function};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-5.0f64..5.0).prop_map(Expr::Number),
        (0usize..3).prop_map(Expr::Variable),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (
                prop_oneof![
                    Just(BinaryOp::Add),
                    Just(BinaryOp::Sub),
                    Just(BinaryOp::Mul),
                ],
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            inner.clone().prop_map(|e| Expr::Binary(
                BinaryOp::Pow,
                Box::new(e),
                Box::new(Expr::Number(2.0))
            )),
            (
                prop_oneof![Just(Function::Sin), Just(Function::Cos), Just(Function::Abs)],
                inner
            )
                .prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
        ]
    })
}

fn eval_tree(e: &Expr, x: &[f64]) -> f64 {
    match e {
        Expr::Number(v) => *v,
        Expr::Variable(i) => x[*i],
        Expr::Neg(a) => -eval_tree(a, x),
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval_tree(a, x), eval_tree(b, x));
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => a / b,
                BinaryOp::Pow => a * a,
            }
        }
        Expr::Call(f, a) => {
            let a = eval_tree(a, x);
            match f {
                Function::Sin => a.sin(),
                Function::Cos => a.cos(),
                Function::Abs => a.abs(),
                Function::Exp => a.exp(),
                Function::Log => a.ln(),
                Function::Sqrt => a.sqrt(),
            }
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn printed_trees_reparse_to_the_same_function(
        e in expr(),
        x in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let text = e.to_string();
        let parsed = parse_field_expression(&text, 3).unwrap();
        let direct = eval_tree(&e, &x);
        prop_assume!(direct.is_finite() && direct.abs() < 1e100);
        prop_assert!(close(parsed.eval(&x).unwrap(), direct), "{text}");
    }

    #[test]
    fn redundant_parentheses_change_nothing(
        e in expr(),
        x in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let text = e.to_string();
        let wrapped = format!("(({text}))");
        let a = parse_field_expression(&text, 3).unwrap().eval(&x);
        let b = parse_field_expression(&wrapped, 3).unwrap().eval(&x);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn products_bind_tighter_than_sums(
        a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0,
    ) {
        let x = [a, b, c];
        let e = parse_field_expression("x1 + x2 * x3", 3).unwrap();
        prop_assert_eq!(e.eval(&x).unwrap(), a + b * c);
        let e = parse_field_expression("x1 - x2 / x3 - x1", 3).unwrap();
        prop_assume!(c.abs() > 1e-3);
        prop_assert_eq!(e.eval(&x).unwrap(), (a - b / c) - a);
        let e = parse_field_expression("-x1^2 + x2*x3^2", 3).unwrap();
        prop_assert!(close(e.eval(&x).unwrap(), -(a * a) + b * (c * c)));
    }

    #[test]
    fn affine_rows_match_matrix_products(
        m in prop::collection::vec(-10.0f64..10.0, 9),
        b in prop::collection::vec(-10.0f64..10.0, 3),
        x in prop::collection::vec(-10.0f64..10.0, 3),
    ) {
        for i in 0..3 {
            let text = format!(
                "{:?}*x1 + {:?}*x2 + {:?}*x3 + {:?}",
                m[3 * i], m[3 * i + 1], m[3 * i + 2], b[i]
            );
            let v = parse_field_expression(&text, 3).unwrap().eval(&x).unwrap();
            let exact = m[3 * i] * x[0] + m[3 * i + 1] * x[1] + m[3 * i + 2] * x[2] + b[i];
            prop_assert!((v - exact).abs() <= 1e-13 * (1.0 + exact.abs().max(100.0)));
        }
    }
}

#[test]
fn powers_are_right_associative() {
    let e = parse_field_expression("2^3^2", 1).unwrap();
    assert_eq!(e.eval(&[0.0]).unwrap(), 512.0);
}
