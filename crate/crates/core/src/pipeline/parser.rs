use super::program::{ArgValue, Block, VisualProgram};
use super::PipelineError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Str(String),
    Num(f64),
    Eq,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn show(&self, src: &str) -> String {
        match self {
            Tok::End => "<end of line>".into(),
            _ => src.to_string(),
        }
    }
}

struct Lexer<'a> {
    line: &'a str,
    line_no: usize,
    chars: Vec<(usize, char)>,
    pos: usize,
}

struct Spanned {
    tok: Tok,
    column: usize,
    text: String,
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl<'a> Lexer<'a> {
    fn new(line: &'a str, line_no: usize) -> Self {
        Lexer { line, line_no, chars: line.char_indices().collect(), pos: 0 }
    }

    fn err(&self, column: usize, token: impl Into<String>, message: impl Into<String>) -> PipelineError {
        PipelineError::SyntaxError { line: self.line_no, column, token: token.into(), message: message.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn byte(&self, i: usize) -> usize {
        self.chars.get(i).map_or(self.line.len(), |&(b, _)| b)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&f) {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<Spanned, PipelineError> {
        self.take_while(char::is_whitespace);
        let start = self.pos;
        let column = start + 1;
        let Some(c) = self.peek() else {
            return Ok(Spanned { tok: Tok::End, column, text: String::new() });
        };
        let single = |tok| (tok, 1usize);
        let tok = match c {
            '=' => single(Tok::Eq),
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            ',' => single(Tok::Comma),
            _ => (Tok::End, 0),
        };
        if tok.1 == 1 {
            self.pos += 1;
            return Ok(Spanned { tok: tok.0, column, text: c.to_string() });
        }
        if ident_start(c) {
            self.take_while(ident_char);
            let text = self.line[self.byte(start)..self.byte(self.pos)].to_string();
            return Ok(Spanned { tok: Tok::Ident(text.clone()), column, text });
        }
        if c == '$' {
            self.pos += 1;
            if !self.peek().is_some_and(ident_start) {
                return Err(self.err(column, "$", "expected variable name after `$`"));
            }
            self.take_while(ident_char);
            let text = self.line[self.byte(start)..self.byte(self.pos)].to_string();
            return Ok(Spanned { tok: Tok::Var(text[1..].to_string()), column, text });
        }
        if c == '"' {
            self.pos += 1;
            let mut value = String::new();
            loop {
                match self.peek() {
                    None => return Err(self.err(column, &self.line[self.byte(start)..], "unterminated string")),
                    Some('"') => {
                        self.pos += 1;
                        break;
                    }
                    Some('\\') => {
                        self.pos += 1;
                        match self.peek() {
                            Some(e @ ('"' | '\\')) => {
                                value.push(e);
                                self.pos += 1;
                            }
                            other => {
                                let t = other.map_or("\\".to_string(), |o| format!("\\{o}"));
                                return Err(self.err(self.pos, t, "only \\\" and \\\\ escapes are allowed"));
                            }
                        }
                    }
                    Some(ch) => {
                        value.push(ch);
                        self.pos += 1;
                    }
                }
            }
            let text = self.line[self.byte(start)..self.byte(self.pos)].to_string();
            return Ok(Spanned { tok: Tok::Str(value), column, text });
        }
        if c == '-' || c.is_ascii_digit() {
            return self.number(start);
        }
        Err(self.err(column, c.to_string(), "unexpected character"))
    }

    fn number(&mut self, start: usize) -> Result<Spanned, PipelineError> {
        let column = start + 1;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        let digits_at = self.pos;
        self.take_while(|c| c.is_ascii_digit());
        let mut ok = self.pos > digits_at;
        if ok && self.peek() == Some('.') {
            self.pos += 1;
            let frac = self.pos;
            self.take_while(|c| c.is_ascii_digit());
            ok = self.pos > frac;
        }
        if ok && matches!(self.peek(), Some('e' | 'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            let exp = self.pos;
            self.take_while(|c| c.is_ascii_digit());
            ok = self.pos > exp;
        }
        // a number glued to identifier characters is malformed
        if self.peek().is_some_and(ident_char) {
            self.take_while(ident_char);
            ok = false;
        }
        let text = self.line[self.byte(start)..self.byte(self.pos)].to_string();
        match text.parse::<f64>() {
            Ok(v) if ok && v.is_finite() => Ok(Spanned { tok: Tok::Num(v), column, text }),
            _ => Err(self.err(column, text, "malformed number")),
        }
    }
}

fn expect(lx: &mut Lexer, want: Tok, what: &str) -> Result<(), PipelineError> {
    let t = lx.next()?;
    if t.tok == want {
        Ok(())
    } else {
        Err(lx.err(t.column, t.tok.show(&t.text), format!("expected {what}")))
    }
}

fn expect_ident(lx: &mut Lexer, what: &str) -> Result<String, PipelineError> {
    let t = lx.next()?;
    match t.tok {
        Tok::Ident(s) => Ok(s),
        other => Err(lx.err(t.column, other.show(&t.text), format!("expected {what}"))),
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<Block, PipelineError> {
    let mut lx = Lexer::new(line, line_no);
    let output = expect_ident(&mut lx, "output variable")?;
    expect(&mut lx, Tok::Eq, "`=`")?;
    let module = expect_ident(&mut lx, "module name")?;
    expect(&mut lx, Tok::LParen, "`(`")?;
    let mut block = Block::new(output, module);
    let first = lx.next()?;
    if first.tok != Tok::RParen {
        let mut pending = Some(first);
        loop {
            let t = match pending.take() {
                Some(t) => t,
                None => lx.next()?,
            };
            let name = match t.tok {
                Tok::Ident(s) => s,
                other => return Err(lx.err(t.column, other.show(&t.text), "expected argument name or `)`")),
            };
            if block.get(&name).is_some() {
                return Err(lx.err(t.column, name, "duplicate argument name"));
            }
            expect(&mut lx, Tok::Eq, "`=`")?;
            let v = lx.next()?;
            let value = match v.tok {
                Tok::Str(s) => ArgValue::Str(s),
                Tok::Num(n) => ArgValue::Num(n),
                Tok::Var(r) => ArgValue::Ref(r),
                other => return Err(lx.err(v.column, other.show(&v.text), "expected string, number or $variable")),
            };
            block.args.push((name, value));
            let sep = lx.next()?;
            match sep.tok {
                Tok::Comma => continue,
                Tok::RParen => break,
                other => return Err(lx.err(sep.column, other.show(&sep.text), "expected `,` or `)`")),
            }
        }
    }
    let tail = lx.next()?;
    if tail.tok != Tok::End {
        return Err(lx.err(tail.column, tail.tok.show(&tail.text), "unexpected text after `)`"));
    }
    Ok(block)
}

/// Parses the line-oriented DSL. Blank lines and `#` comment lines are skipped.
pub fn parse_program(text: &str) -> Result<VisualProgram, PipelineError> {
    let mut blocks = Vec::new();
    let mut last_line = 0;
    for (i, line) in text.lines().enumerate() {
        last_line = i + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        blocks.push(parse_line(line, i + 1)?);
    }
    if blocks.is_empty() {
        return Err(PipelineError::SyntaxError {
            line: last_line.max(1),
            column: 1,
            token: "<end of input>".into(),
            message: "a program needs at least one block".into(),
        });
    }
    Ok(VisualProgram::new(blocks))
}
