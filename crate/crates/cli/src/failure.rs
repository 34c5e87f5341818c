use serde_json::json;

/// A command failure, reported on stderr as one JSON line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub internal: bool,
}

impl Failure {
    pub fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure { kind: kind.to_string(), message: message.into(), internal: false }
    }

    pub fn internal(kind: &str, message: impl Into<String>) -> Self {
        Failure { kind: kind.to_string(), message: message.into(), internal: true }
    }

    pub fn exit_code(&self) -> i32 {
        if self.internal {
            2
        } else {
            1
        }
    }

    pub fn to_json_line(&self) -> String {
        json!({ "error": self.kind, "message": self.message, "exit_code": self.exit_code() }).to_string()
    }
}

impl From<geocorpus::Error> for Failure {
    fn from(e: geocorpus::Error) -> Self {
        Failure { kind: e.kind().to_string(), message: e.to_string(), internal: !e.is_input_error() }
    }
}
