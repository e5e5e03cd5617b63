//! Recursive-descent parser for the weight-spec grammar:
//!
//! ```text
//! spec := const(<pos-real>)
//!       | powlog(x0=<real>, a=<real>, b=<real>)
//!       | pow(<spec>, <real>)
//!       | prod(<spec>, <spec>, ...)
//!       | piecewise([<lo>,<hi>]: <spec>; ...; else: <spec>)
//! ```
//!
//! Whitespace-insensitive; numbers in decimal or scientific notation.

use super::{ParseError, WeightSpec};

pub fn parse_weight_spec(text: &str) -> Result<WeightSpec, ParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let spec = p.spec()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.syntax("trailing input after spec"));
    }
    Ok(spec)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn semantic(&self, offset: usize, message: String) -> ParseError {
        ParseError::Semantic { offset, message }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<(), ParseError> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("expected '{}'", ch as char)))
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<(f64, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut pos = self.pos;
        let bytes = self.bytes;
        if pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
            pos += 1;
        }
        let digits_from = pos;
        while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'.') {
            pos += 1;
        }
        if pos == digits_from {
            return Err(self.syntax("expected a number"));
        }
        if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
            let mut epos = pos + 1;
            if epos < bytes.len() && (bytes[epos] == b'+' || bytes[epos] == b'-') {
                epos += 1;
            }
            if epos < bytes.len() && bytes[epos].is_ascii_digit() {
                pos = epos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii slice");
        let value: f64 = text
            .parse()
            .map_err(|_| self.syntax("malformed number"))?;
        self.pos = pos;
        Ok((value, start))
    }

    fn key_value(&mut self, key: &str) -> Result<(f64, usize), ParseError> {
        self.skip_ws();
        let got = self.ident();
        if got != key {
            self.pos -= got.len();
            return Err(self.syntax(&format!("expected '{key}='")));
        }
        self.expect(b'=')?;
        self.number()
    }

    fn spec(&mut self) -> Result<WeightSpec, ParseError> {
        self.skip_ws();
        let at = self.pos;
        let head = self.ident();
        match head.as_str() {
            "const" => {
                self.expect(b'(')?;
                let (c, coff) = self.number()?;
                self.expect(b')')?;
                if !(c > 0.0) || !c.is_finite() {
                    return Err(self.semantic(coff, format!("const must be positive, got {c}")));
                }
                Ok(WeightSpec::Const(c))
            }
            "powlog" => {
                self.expect(b'(')?;
                let (x0, _) = self.key_value("x0")?;
                self.expect(b',')?;
                let (a, _) = self.key_value("a")?;
                self.expect(b',')?;
                let (b, _) = self.key_value("b")?;
                self.expect(b')')?;
                Ok(WeightSpec::PowLog { x0, a, b })
            }
            "pow" => {
                self.expect(b'(')?;
                let inner = self.spec()?;
                self.expect(b',')?;
                let (r, _) = self.number()?;
                self.expect(b')')?;
                Ok(WeightSpec::Power(Box::new(inner), r))
            }
            "prod" => {
                self.expect(b'(')?;
                let mut children = vec![self.spec()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    children.push(self.spec()?);
                }
                self.expect(b')')?;
                Ok(WeightSpec::Product(children))
            }
            "piecewise" => {
                self.expect(b'(')?;
                let mut pieces = Vec::new();
                loop {
                    self.skip_ws();
                    if self.bytes.get(self.pos) == Some(&b'[') {
                        self.pos += 1;
                        let (lo, looff) = self.number()?;
                        self.expect(b',')?;
                        let (hi, _) = self.number()?;
                        self.expect(b']')?;
                        self.expect(b':')?;
                        let spec = self.spec()?;
                        self.expect(b';')?;
                        if !(hi > lo) {
                            return Err(self.semantic(
                                looff,
                                format!("piecewise region must have lo < hi, got [{lo},{hi}]"),
                            ));
                        }
                        pieces.push((lo, hi, spec));
                    } else {
                        break;
                    }
                }
                let kw_at = self.pos;
                let kw = self.ident();
                if kw != "else" {
                    self.pos = kw_at;
                    return Err(self.syntax("expected a '[lo,hi]:' region or 'else:'"));
                }
                if pieces.is_empty() {
                    return Err(self.semantic(
                        kw_at,
                        "piecewise needs at least one region before else".to_string(),
                    ));
                }
                self.expect(b':')?;
                let default = self.spec()?;
                self.expect(b')')?;
                Ok(WeightSpec::Piecewise {
                    pieces,
                    default: Box::new(default),
                })
            }
            "" => Err(self.syntax("expected a weight spec")),
            other => {
                self.pos = at;
                Err(self.syntax(&format!("unknown spec head '{other}'")))
            }
        }
    }
}
