//! JSON-lines logging on standard error.

use std::io::Write;

use log::LevelFilter;
use serde_json::json;

pub fn init(level: LevelFilter) {
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("GLAREKIT_LOG")
        .format(|buf, record| {
            let line = json!({
                "ts": buf.timestamp_millis().to_string(),
                "level": record.level().as_str(),
                "module": record.module_path().unwrap_or(record.target()),
                "msg": record.args().to_string(),
            });
            writeln!(buf, "{line}")
        })
        .target(env_logger::Target::Stderr)
        .init();
}
