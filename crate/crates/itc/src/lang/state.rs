//! Machine states: a variable map plus a sparse byte-addressed memory.

use std::collections::BTreeMap;

use serde::Serialize;

use super::ast::{Value, Var};

/// Sparse memory mapping 64-bit addresses to chunks. Reading an unmapped
/// address is an error, not zero.
pub type Mem = BTreeMap<u64, u8>;

/// A machine state. Variables absent from `vm` are undefined (`Undef`);
/// reading one raises an error event.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MachState {
    pub vm: BTreeMap<Var, Value>,
    pub mem: Mem,
}

impl MachState {
    pub fn new() -> MachState {
        MachState::default()
    }

    /// `None` means the variable is undefined.
    pub fn get(&self, x: &str) -> Option<&Value> {
        self.vm.get(x)
    }

    pub fn set(&mut self, x: impl Into<Var>, v: Value) {
        self.vm.insert(x.into(), v);
    }

    pub fn with(mut self, x: impl Into<Var>, v: Value) -> MachState {
        self.set(x, v);
        self
    }

    pub fn read_mem(&self, addr: u64) -> Option<u8> {
        self.mem.get(&addr).copied()
    }

    pub fn write_mem(&mut self, addr: u64, chunk: u8) {
        self.mem.insert(addr, chunk);
    }
}
