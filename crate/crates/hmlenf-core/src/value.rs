//! Values, concrete events and actions.

use alloc::boxed::Box;
use alloc::sync::Arc;
use core::fmt;

/// Interned-by-sharing symbol used for atoms and variable names.
pub type Sym = Arc<str>;

/// Builds a [`Sym`] from a string slice.
pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

/// A data value: an atom, an integer or a depth-one tagged value such as `err(3)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Atom(Sym),
    Int(i64),
    Tagged(Sym, Box<Value>),
}

impl Value {
    pub fn atom(s: &str) -> Value {
        Value::Atom(sym(s))
    }

    /// Builds a tagged value; returns `None` if `inner` is itself tagged.
    pub fn tagged(tag: &str, inner: Value) -> Option<Value> {
        match inner {
            Value::Tagged(..) => None,
            v => Some(Value::Tagged(sym(tag), Box::new(v))),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Value::Atom(_))
    }

    pub fn sort(&self) -> Sort {
        match self {
            Value::Atom(_) => Sort::Atom,
            Value::Int(_) => Sort::Int,
            Value::Tagged(..) => Sort::Tagged,
        }
    }
}

/// The three data sorts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Atom,
    Int,
    Tagged,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => f.write_str(a),
            Value::Int(n) => write!(f, "{n}"),
            Value::Tagged(t, v) => write!(f, "{t}({v})"),
        }
    }
}

/// Direction of an event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    In,
    Out,
}

impl Dir {
    pub fn symbol(self) -> char {
        match self {
            Dir::In => '?',
            Dir::Out => '!',
        }
    }
}

/// A concrete visible event `subject?payload` or `subject!payload`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub dir: Dir,
    pub subject: Value,
    pub payload: Value,
}

impl Event {
    pub fn new(dir: Dir, subject: &str, payload: Value) -> Event {
        Event {
            dir,
            subject: Value::atom(subject),
            payload,
        }
    }

    pub fn input(subject: &str, payload: Value) -> Event {
        Event::new(Dir::In, subject, payload)
    }

    pub fn output(subject: &str, payload: Value) -> Event {
        Event::new(Dir::Out, subject, payload)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}({})", self.subject, self.dir.symbol(), self.payload)
    }
}

/// A visible event or the silent action.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Ev(Event),
    Tau,
}

impl Action {
    pub fn event(&self) -> Option<&Event> {
        match self {
            Action::Ev(e) => Some(e),
            Action::Tau => None,
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }
}

impl From<Event> for Action {
    fn from(e: Event) -> Action {
        Action::Ev(e)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Ev(e) => e.fmt(f),
            Action::Tau => f.write_str("tau"),
        }
    }
}

/// A finite sequence of visible events.
pub type Trace = alloc::vec::Vec<Event>;
