use std::fmt;

use serde::{Deserialize, Serialize};

/// Name of an atomic action.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionLabel(String);

impl ActionLabel {
    pub fn new(name: impl Into<String>) -> Self {
        ActionLabel(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ActionLabel {
    fn from(s: &str) -> Self {
        ActionLabel(s.to_owned())
    }
}

impl From<String> for ActionLabel {
    fn from(s: String) -> Self {
        ActionLabel(s)
    }
}

/// Name of a synchronization barrier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BarrierName(String);

impl BarrierName {
    pub fn new(name: impl Into<String>) -> Self {
        BarrierName(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BarrierName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for BarrierName {
    fn from(s: &str) -> Self {
        BarrierName(s.to_owned())
    }
}

impl From<String> for BarrierName {
    fn from(s: String) -> Self {
        BarrierName(s)
    }
}

/// Abstract syntax of a barrier-synchronization process.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProcessTerm {
    Stop,
    Act(ActionLabel, Box<ProcessTerm>),
    Sync(BarrierName, Box<ProcessTerm>),
    New(BarrierName, Box<ProcessTerm>),
    Par(Box<ProcessTerm>, Box<ProcessTerm>),
}

impl ProcessTerm {
    pub fn act(label: impl Into<ActionLabel>, cont: ProcessTerm) -> Self {
        ProcessTerm::Act(label.into(), Box::new(cont))
    }

    pub fn sync(barrier: impl Into<BarrierName>, cont: ProcessTerm) -> Self {
        ProcessTerm::Sync(barrier.into(), Box::new(cont))
    }

    pub fn new_barrier(barrier: impl Into<BarrierName>, body: ProcessTerm) -> Self {
        ProcessTerm::New(barrier.into(), Box::new(body))
    }

    pub fn par(left: ProcessTerm, right: ProcessTerm) -> Self {
        ProcessTerm::Par(Box::new(left), Box::new(right))
    }

    /// Left-associated parallel composition of `parts`; `Stop` when empty.
    pub fn par_all(parts: impl IntoIterator<Item = ProcessTerm>) -> Self {
        let mut it = parts.into_iter();
        let Some(first) = it.next() else {
            return ProcessTerm::Stop;
        };
        it.fold(first, ProcessTerm::par)
    }

    /// Number of action prefixes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |t| {
            if matches!(t, ProcessTerm::Act(..)) {
                n += 1;
            }
        });
        n
    }

    /// Action labels in left-to-right syntactic order (duplicates included).
    pub fn labels(&self) -> Vec<ActionLabel> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let ProcessTerm::Act(a, _) = t {
                out.push(a.clone());
            }
        });
        out
    }

    /// Pre-order traversal without recursion, so very deep terms are fine.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ProcessTerm)) {
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            f(t);
            match t {
                ProcessTerm::Stop => {}
                ProcessTerm::Act(_, p) | ProcessTerm::Sync(_, p) | ProcessTerm::New(_, p) => {
                    stack.push(p)
                }
                ProcessTerm::Par(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
    }

    /// True when the term can perform no action and has no pending barrier,
    /// once every barrier whose participants have all arrived is crossed.
    pub fn is_terminated(&self) -> bool {
        match self {
            ProcessTerm::Stop => true,
            ProcessTerm::Act(..) | ProcessTerm::Sync(..) => false,
            ProcessTerm::Par(l, r) => l.is_terminated() && r.is_terminated(),
            ProcessTerm::New(b, p) => {
                let q = super::semantics::sync_b(p, b);
                !super::semantics::wait_b(&q, b) && q.is_terminated()
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, trailing_par: bool) -> fmt::Result {
        match self {
            ProcessTerm::Stop => f.write_str("0"),
            ProcessTerm::Act(a, p) => {
                write!(f, "{a}.")?;
                p.fmt_operand(f, trailing_par)
            }
            ProcessTerm::Sync(b, p) => {
                write!(f, "<{b}> ")?;
                p.fmt_operand(f, trailing_par)
            }
            ProcessTerm::New(b, p) => {
                if trailing_par {
                    write!(f, "(")?;
                }
                write!(f, "nu({b}) ")?;
                p.fmt_prec(f, false)?;
                if trailing_par {
                    write!(f, ")")?;
                }
                Ok(())
            }
            ProcessTerm::Par(l, r) => {
                l.fmt_prec(f, true)?;
                f.write_str(" || ")?;
                match **r {
                    ProcessTerm::Par(..) => {
                        f.write_str("(")?;
                        r.fmt_prec(f, false)?;
                        f.write_str(")")
                    }
                    _ => r.fmt_prec(f, trailing_par),
                }
            }
        }
    }

    // Continuation of a prefix: a parallel composition needs brackets.
    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>, trailing_par: bool) -> fmt::Result {
        if let ProcessTerm::Par(..) = self {
            f.write_str("[")?;
            self.fmt_prec(f, false)?;
            f.write_str("]")
        } else {
            self.fmt_prec(f, trailing_par)
        }
    }
}

impl fmt::Display for ProcessTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

/// A complete execution: the sequence of actions performed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Execution(pub Vec<ActionLabel>);

impl Execution {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn steps(&self) -> &[ActionLabel] {
        &self.0
    }
}

impl fmt::Display for Execution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}
