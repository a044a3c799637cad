//! Command-line entry point. Placeholder while the solver API settles.

use std::ffi::OsString;

pub fn run<I, T>(_args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    eprintln!("CLI not wired up yet");
    2
}
