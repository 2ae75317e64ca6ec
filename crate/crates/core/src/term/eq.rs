use super::{Judgment, Path, Term};

/// Outcome of a hole-tolerant comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TriBool {
    Yes,
    /// First (leftmost-outermost) mismatching position.
    No(Path),
    /// Hole positions that blocked a decision; never empty.
    Unknown(Vec<Path>),
}

impl TriBool {
    pub fn is_yes(&self) -> bool {
        matches!(self, TriBool::Yes)
    }

    pub fn is_no(&self) -> bool {
        matches!(self, TriBool::No(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, TriBool::Unknown(_))
    }

    /// Classification without payload, for symmetry checks.
    pub fn class(&self) -> u8 {
        match self {
            TriBool::Yes => 0,
            TriBool::No(_) => 1,
            TriBool::Unknown(_) => 2,
        }
    }

    fn under(self, prefix: usize) -> TriBool {
        match self {
            TriBool::Yes => TriBool::Yes,
            TriBool::No(p) => TriBool::No(p.prefixed(prefix)),
            TriBool::Unknown(hs) => TriBool::Unknown(hs.into_iter().map(|h| h.prefixed(prefix)).collect()),
        }
    }
}

struct Walk {
    mismatch: Option<Path>,
    holes: Vec<Path>,
}

impl Walk {
    fn go(&mut self, a: &Term, b: &Term, path: &mut Vec<usize>) {
        if self.mismatch.is_some() {
            return;
        }
        if a.is_hole() || b.is_hole() {
            self.holes.push(Path(path.clone()));
            return;
        }
        if !a.same_head(b) {
            self.mismatch = Some(Path(path.clone()));
            return;
        }
        for (i, (x, y)) in a.children().into_iter().zip(b.children()).enumerate() {
            path.push(i);
            self.go(x, y, path);
            path.pop();
        }
    }

    fn finish(self) -> TriBool {
        match (self.mismatch, self.holes.is_empty()) {
            (Some(p), _) => TriBool::No(p),
            (None, true) => TriBool::Yes,
            (None, false) => TriBool::Unknown(self.holes),
        }
    }
}

/// Three-valued structural equality with exact name comparison.
///
/// Abbreviations must be expanded by the caller; an `Abbrev` is compared as
/// an opaque leaf.
pub fn eq3(a: &Term, b: &Term) -> TriBool {
    let mut w = Walk {
        mismatch: None,
        holes: Vec::new(),
    };
    w.go(a, b, &mut Vec::new());
    w.finish()
}

/// [`eq3`] lifted to judgments; the first path step is the slot index.
pub fn eq3_judgment(a: &Judgment, b: &Judgment) -> TriBool {
    if a.is_hole() || b.is_hole() {
        return TriBool::Unknown(vec![Path::root()]);
    }
    if a.kind() != b.kind() {
        return TriBool::No(Path::root());
    }
    let mut holes = Vec::new();
    for (i, (x, y)) in a.slots().into_iter().zip(b.slots()).enumerate() {
        match eq3(x, y).under(i) {
            TriBool::Yes => {}
            no @ TriBool::No(_) => return no,
            TriBool::Unknown(hs) => holes.extend(hs),
        }
    }
    if holes.is_empty() {
        TriBool::Yes
    } else {
        TriBool::Unknown(holes)
    }
}
