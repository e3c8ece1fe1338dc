use super::Formula;

// Binding strength, loosest first.
const IFF: u8 = 1;
const IMP: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => IFF,
        Formula::Implies(..) => IMP,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        _ => UNARY,
    }
}

/// A formula whose text ends inside a quantifier body. Such formulas are
/// parenthesized as left operands so readers assuming maximal quantifier
/// scope see the same tree as the parser.
fn ends_in_quantifier(f: &Formula) -> bool {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => true,
        Formula::Not(a) => ends_in_quantifier(a),
        _ => false,
    }
}

/// Renders a formula in the concrete grammar with minimal parentheses.
pub fn render(f: &Formula) -> String {
    let mut out = String::new();
    write(f, &mut out);
    out
}

fn write(f: &Formula, out: &mut String) {
    match f {
        Formula::Unary(p, v) => {
            out.push_str(p);
            out.push('(');
            out.push_str(v.name());
            out.push(')');
        }
        Formula::Binary(r, a, b) => {
            out.push_str(&format!("{r}({a},{b})"));
        }
        Formula::Eq(a, b) => out.push_str(&format!("{a} = {b}")),
        Formula::Order(o, a, b) => out.push_str(&format!("{a} {o} {b}")),
        Formula::Not(a) => {
            out.push('!');
            operand(a, level(a) < UNARY, out);
        }
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            out.push_str(if matches!(f, Formula::Forall(..)) {
                "forall "
            } else {
                "exists "
            });
            out.push_str(v.name());
            out.push_str(". ");
            let bare = matches!(
                **body,
                Formula::Unary(..)
                    | Formula::Binary(..)
                    | Formula::Not(..)
                    | Formula::Forall(..)
                    | Formula::Exists(..)
            );
            operand(body, !bare, out);
        }
        Formula::And(a, b) => infix(a, b, " & ", AND, true, out),
        Formula::Or(a, b) => infix(a, b, " | ", OR, true, out),
        Formula::Implies(a, b) => infix(a, b, " -> ", IMP, false, out),
        Formula::Iff(a, b) => infix(a, b, " <-> ", IFF, true, out),
    }
}

fn infix(a: &Formula, b: &Formula, op: &str, lvl: u8, left_assoc: bool, out: &mut String) {
    let (la, lb) = (level(a), level(b));
    let paren_a = if left_assoc { la < lvl } else { la <= lvl } || ends_in_quantifier(a);
    let paren_b = if left_assoc { lb <= lvl } else { lb < lvl };
    operand(a, paren_a, out);
    out.push_str(op);
    operand(b, paren_b, out);
}

fn operand(f: &Formula, paren: bool, out: &mut String) {
    if paren {
        out.push('(');
        write(f, out);
        out.push(')');
    } else {
        write(f, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn atoms() {
        assert_eq!(render(&parse("P(x)").unwrap()), "P(x)");
        assert_eq!(render(&parse("R(y,x)").unwrap()), "R(y,x)");
        assert_eq!(render(&parse("x<=0y").unwrap()), "x <=0 y");
    }

    #[test]
    fn minimal_parentheses() {
        for text in [
            "P(x) & Q(x) & S(x)",
            "P(x) & (Q(x) & S(x))",
            "P(x) -> Q(x) -> S(x)",
            "(P(x) -> Q(x)) -> S(x)",
            "!(P(x) | Q(x))",
            "(exists x. P(x)) -> exists y. P(y)",
            "forall x. forall y. (x <= y | y <= x)",
            "forall x. !P(x)",
            "!!P(x)",
            "P(x) <-> Q(x) <-> S(x)",
            "P(x) <-> (Q(x) <-> S(x))",
        ] {
            assert_eq!(render(&parse(text).unwrap()), text);
        }
    }

    #[test]
    fn left_quantifier_operands_are_closed() {
        let f = parse("(forall x. P(x)) & Q(y)").unwrap();
        assert_eq!(render(&f), "(forall x. P(x)) & Q(y)");
        let f = parse("forall x. P(x) & Q(y)").unwrap();
        assert_eq!(render(&f), "(forall x. P(x)) & Q(y)");
    }
}
