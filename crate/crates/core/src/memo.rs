use std::collections::HashMap;
use std::hash::Hash;
use std::sync::RwLock;

/// Shared memo table. Concurrent callers may compute the same entry twice;
/// the first stored value wins and every reader sees it.
#[derive(Debug)]
pub(crate) struct Memo<K, V> {
    map: RwLock<HashMap<K, V>>,
}

impl<K, V> Default for Memo<K, V> {
    fn default() -> Self {
        Self { map: RwLock::new(HashMap::new()) }
    }
}

impl<K: Eq + Hash + Clone, V: Clone> Memo<K, V> {
    pub(crate) fn get(&self, key: &K) -> Option<V> {
        self.map.read().unwrap_or_else(|e| e.into_inner()).get(key).cloned()
    }

    pub(crate) fn insert(&self, key: K, value: V) -> V {
        let mut map = self.map.write().unwrap_or_else(|e| e.into_inner());
        map.entry(key).or_insert(value).clone()
    }

    pub(crate) fn get_or_try_insert<E>(
        &self,
        key: &K,
        compute: impl FnOnce() -> Result<V, E>,
    ) -> Result<V, E> {
        if let Some(v) = self.get(key) {
            return Ok(v);
        }
        let v = compute()?;
        Ok(self.insert(key.clone(), v))
    }

    pub(crate) fn len(&self) -> usize {
        self.map.read().unwrap_or_else(|e| e.into_inner()).len()
    }
}

impl<K: Clone, V: Clone> Clone for Memo<K, V> {
    fn clone(&self) -> Self {
        let map = self.map.read().unwrap_or_else(|e| e.into_inner()).clone();
        Self { map: RwLock::new(map) }
    }
}
