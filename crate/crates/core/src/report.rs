//! Line-oriented law-check reports.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

/// One checked assertion: `PROP <name> PASS|FAIL n=<int> hits=<int> [cex=...]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropLine {
    pub name: String,
    pub status: Status,
    pub n: usize,
    pub hits: usize,
    pub cex: Option<String>,
    pub note: Option<String>,
    /// The line documents an impossibility, so FAIL is the desired outcome.
    pub expected_fail: bool,
}

impl PropLine {
    pub fn new(name: impl Into<String>, pass: bool, n: usize, hits: usize) -> PropLine {
        PropLine {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            n,
            hits,
            cex: None,
            note: None,
            expected_fail: false,
        }
    }

    pub fn with_cex(mut self, cex: Option<String>) -> PropLine {
        self.cex = cex;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> PropLine {
        self.note = Some(note.into());
        self
    }

    pub fn expect_fail(mut self) -> PropLine {
        self.expected_fail = true;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Whether the line is the desired outcome.
    pub fn ok(&self) -> bool {
        self.passed() != self.expected_fail
    }
}

impl fmt::Display for PropLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let st = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        };
        write!(f, "PROP {} {} n={} hits={}", self.name, st, self.n, self.hits)?;
        if let Some(c) = &self.cex {
            write!(f, " cex={}", c.replace('\n', " "))?;
        }
        if let Some(n) = &self.note {
            write!(f, " note={n}")?;
        }
        if self.expected_fail {
            write!(f, " expected=FAIL")?;
        }
        Ok(())
    }
}

/// A titled list of lines plus free-form trailer lines.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropReport {
    pub title: String,
    pub lines: Vec<PropLine>,
    pub trailer: Vec<String>,
}

impl PropReport {
    pub fn new(title: impl Into<String>) -> PropReport {
        PropReport { title: title.into(), ..Default::default() }
    }

    pub fn push(&mut self, line: PropLine) {
        self.lines.push(line);
    }

    pub fn extend(&mut self, other: PropReport) {
        self.lines.extend(other.lines);
        self.trailer.extend(other.trailer);
    }

    pub fn ok(&self) -> bool {
        self.lines.iter().all(PropLine::ok)
    }

    pub fn line(&self, name: &str) -> Option<&PropLine> {
        self.lines.iter().find(|l| l.name == name)
    }

    /// Names of lines that did not reach their desired outcome.
    pub fn failures(&self) -> Vec<&str> {
        self.lines.iter().filter(|l| !l.ok()).map(|l| l.name.as_str()).collect()
    }
}

impl fmt::Display for PropReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.title.is_empty() {
            writeln!(f, "# {}", self.title)?;
        }
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        for t in &self.trailer {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}
