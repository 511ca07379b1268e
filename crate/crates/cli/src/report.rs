//! Run reports: every command produces one, rendered as text or JSON with
//! the same numbers in both.

use clap::ValueEnum;
use serde_json::json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NoneFound,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NoneFound => "none-found",
        }
    }

    /// 0 pass, 1 verification fail, 4 none-found; 2 and 3 are reserved for
    /// usage and precision errors raised before a report exists.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::NoneFound => 4,
        }
    }
}

pub struct RunReport {
    pub command: &'static str,
    pub config: serde_json::Value,
    pub status: Status,
    pub results: serde_json::Value,
    /// Pre-rendered text body, newline-terminated lines without the final
    /// status line.
    pub text: String,
    pub timing_ms: u128,
}

impl RunReport {
    pub fn print(&self, format: Format) {
        match format {
            Format::Text => {
                print!("{}", self.text);
                println!("status: {}", self.status.as_str());
            }
            Format::Json => {
                let doc = json!({
                    "command": self.command,
                    "config": self.config,
                    "status": self.status.as_str(),
                    "timing_ms": self.timing_ms,
                    "results": self.results,
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("report is valid JSON"));
            }
        }
    }
}
