use std::collections::BTreeMap;

use crate::rational::Rational;

/// A rational assignment to solver variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    values: BTreeMap<String, Rational>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Rational> {
        self.values.get(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Rational) {
        self.values.insert(name.into(), value);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rational)> {
        self.values.iter()
    }

    /// The sub-assignment over `names`, skipping names without a value.
    pub fn restrict<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Model {
        let mut out = Model::new();
        for n in names {
            if let Some(v) = self.values.get(n) {
                out.insert(n, v.clone());
            }
        }
        out
    }
}

impl FromIterator<(String, Rational)> for Model {
    fn from_iter<I: IntoIterator<Item = (String, Rational)>>(iter: I) -> Self {
        Self { values: iter.into_iter().collect() }
    }
}

impl<'a> IntoIterator for &'a Model {
    type Item = (&'a String, &'a Rational);
    type IntoIter = std::collections::btree_map::Iter<'a, String, Rational>;

    fn into_iter(self) -> Self::IntoIter {
        self.values.iter()
    }
}
