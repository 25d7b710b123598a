//! The four instrumented machines.

pub mod lam;
pub mod naive;
pub mod space;
pub mod time;

pub use lam::SpaceLam;
pub use naive::NaiveKam;
pub use space::SpaceKam;
pub use time::TimeKam;

use std::rc::Rc;

use crate::code::Code;
use crate::machine::{run, Machine, MachineError, MachineKind, RunOptions, RunProfile};
use crate::term::Term;

pub fn boxed<'c>(kind: MachineKind, code: &'c Code) -> Box<dyn Machine + 'c> {
    match kind {
        MachineKind::Naive => Box::new(NaiveKam::new(code)),
        MachineKind::Space => Box::new(SpaceKam::new(code)),
        MachineKind::Time => Box::new(TimeKam::new(code)),
        MachineKind::Lam => Box::new(SpaceLam::new(code)),
    }
}

pub struct Executed {
    pub profile: RunProfile,
    /// Decoded final state; absent when fuel ran out.
    pub result: Option<Rc<Term>>,
}

/// Run a fresh machine of the given kind on `code` and decode the final
/// state if one was reached.
pub fn execute(kind: MachineKind, code: &Code, opts: &RunOptions) -> Result<Executed, MachineError> {
    let mut m = boxed(kind, code);
    let profile = run(m.as_mut(), opts)?;
    let result = match profile.completed() {
        true => Some(m.decode()?),
        false => None,
    };
    Ok(Executed { profile, result })
}
