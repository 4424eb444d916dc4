use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses a sequence of s-expressions; `|quoted|` symbols and string literals
/// are kept verbatim as atoms.
pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' => stack.push(Vec::new()),
            ')' => {
                let done = stack.pop().filter(|_| !stack.is_empty()).ok_or("unbalanced `)`")?;
                stack.last_mut().expect("non-empty").push(Sexp::List(done));
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {}
            '"' | '|' => {
                let close = c;
                let mut s = String::from(c);
                loop {
                    match chars.next() {
                        Some(d) if d == close => {
                            s.push(d);
                            // "" escapes a quote inside string literals
                            if close == '"' && chars.peek() == Some(&'"') {
                                s.push(chars.next().unwrap());
                                continue;
                            }
                            break;
                        }
                        Some(d) => s.push(d),
                        None => return Err("unterminated literal".into()),
                    }
                }
                stack.last_mut().expect("non-empty").push(Sexp::Atom(s));
            }
            _ => {
                let mut s = String::from(c);
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || d == '(' || d == ')' || d == ';' {
                        break;
                    }
                    s.push(d);
                    chars.next();
                }
                stack.last_mut().expect("non-empty").push(Sexp::Atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists_and_comments() {
        let v = parse_sexps("((a 1) ; note\n (b (- 2)))").unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "((a 1) (b (- 2)))");
        assert!(parse_sexps("(a").is_err());
        assert!(parse_sexps("a)").is_err());
        assert_eq!(parse_sexps("(error \"x \"\"y\"\"\")").unwrap()[0].to_string(), "(error \"x \"\"y\"\"\")");
    }
}
