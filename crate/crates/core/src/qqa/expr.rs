//! Amplitude expressions such as `-3/5`, `4*sqrt(39)/25` or `(1/sqrt(2), -1/sqrt(2))`.
//!
//! Grammar: sums of products of signed atoms; an atom is a decimal number, `sqrt(e)`,
//! a parenthesised expression, or a complex pair `(re, im)`.

use crate::linalg::C64;

use super::QqaError;

pub fn parse_amplitude(text: &str) -> Result<C64, QqaError> {
    let mut p = Parser { src: text, chars: text.char_indices().collect(), pos: 0 };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(p.error("value is not finite"));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> QqaError {
        QqaError::Expression { input: self.src.to_string(), message: format!("{message} at offset {}", self.offset()) }
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.src.len(), |&(i, _)| i)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<C64, QqaError> {
        let mut v = self.term()?;
        loop {
            if self.eat('+') {
                v += self.term()?;
            } else if self.eat('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<C64, QqaError> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v *= self.unary()?;
            } else if self.eat('/') {
                let d = self.unary()?;
                if d.norm() == 0.0 {
                    return Err(self.error("division by zero"));
                }
                v /= d;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<C64, QqaError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<C64, QqaError> {
        self.skip_ws();
        if self.eat('(') {
            let first = self.expr()?;
            if self.eat(',') {
                let second = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                return Ok(first + C64::new(0.0, 1.0) * second);
            }
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(first);
        }
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        if self.pos > start {
            let word: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
            if word != "sqrt" {
                self.pos = start;
                return Err(self.error(&format!("unknown function '{word}'")));
            }
            if !self.eat('(') {
                return Err(self.error("expected '(' after sqrt"));
            }
            let arg = self.expr()?;
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            if arg.im != 0.0 || arg.re < 0.0 {
                return Err(self.error("sqrt needs a nonnegative real argument"));
            }
            return Ok(C64::new(arg.re.sqrt(), 0.0));
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E') {
            // Exponent signs belong to the literal.
            let was_exp = matches!(self.peek(), Some('e' | 'E'));
            self.pos += 1;
            if was_exp && matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
        }
        if self.pos == start {
            return Err(self.error("expected a number"));
        }
        let lit: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
        lit.parse::<f64>()
            .map(|v| C64::new(v, 0.0))
            .map_err(|_| {
                self.pos = start;
                self.error(&format!("invalid number '{lit}'"))
            })
    }
}
