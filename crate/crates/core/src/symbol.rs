use std::collections::HashMap;
use std::fmt;
use std::sync::{LazyLock, RwLock};

/// An interned string. Ordering is by interning order, which is stable for a
/// given program run.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u32);

struct Interner {
    ids: HashMap<&'static str, u32>,
    strings: Vec<&'static str>,
}

static INTERNER: LazyLock<RwLock<Interner>> = LazyLock::new(|| {
    RwLock::new(Interner {
        ids: HashMap::new(),
        strings: Vec::new(),
    })
});

impl Symbol {
    pub fn intern(text: &str) -> Symbol {
        if let Some(&id) = INTERNER.read().unwrap().ids.get(text) {
            return Symbol(id);
        }
        let mut interner = INTERNER.write().unwrap();
        if let Some(&id) = interner.ids.get(text) {
            return Symbol(id);
        }
        // Interned strings live for the whole process.
        let leaked: &'static str = Box::leak(text.to_owned().into_boxed_str());
        let id = interner.strings.len() as u32;
        interner.strings.push(leaked);
        interner.ids.insert(leaked, id);
        Symbol(id)
    }

    pub fn as_str(self) -> &'static str {
        INTERNER.read().unwrap().strings[self.0 as usize]
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<&str> for Symbol {
    fn from(text: &str) -> Self {
        Symbol::intern(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_idempotent() {
        let a = Symbol::intern("cell");
        let b = Symbol::intern("cell");
        assert_eq!(a, b);
        assert_eq!(a.as_str(), "cell");
        assert_ne!(a, Symbol::intern("cell2"));
    }
}
