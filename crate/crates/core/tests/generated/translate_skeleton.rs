//! Command suite for `Translate`.

use bindkit::testkit::{CommandMeta, CommandSuiteSpec};
#[allow(unused_imports)]
use super::*; // FILL: bring the command and model types into scope

/// What fixtures prepare and checkers inspect.
#[allow(dead_code)]
pub struct TranslateWorld {
    pub shape: (), // FILL: type
    pub new_x: (), // FILL: type
    pub new_y: (), // FILL: type
}

pub fn translate_suite() -> CommandSuiteSpec<TranslateWorld> {
    let meta = CommandMeta::new("Translate", &["shape", "new_x", "new_y"], true);
    CommandSuiteSpec::new(meta, |w: &TranslateWorld| -> Translate {
        let _ = w;
        todo!("create the command") // FILL
    })
    .can_do("can_do_1", || todo!("a world where the command can execute")) // FILL
    .cannot_do("cannot_do_1", || todo!("a world where it cannot")) // FILL
    .do_checker("do_1", |_w| todo!("assert the effects")) // FILL
    .undo_checker("undo_1", |_w| todo!("assert the effects are reverted")) // FILL
}
