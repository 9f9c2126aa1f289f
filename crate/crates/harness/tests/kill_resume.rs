//! A run killed mid-way resumes without duplicates or truncated files.

mod common;

#[test]
fn killed_remote_run_resumes_cleanly() {
    common::kill_and_resume();
}
