//! Station-bus protocol: one JSON object per line in each direction.
//!
//! Requests carry an `op` and an optional `id`; every reply copies the
//! `id`. Successful replies are `{"id", "ok": true, "result"}`, failures
//! `{"id", "ok": false, "error", "message"}` with `error` one of
//! `malformed`, `unknown-op`, `invalid-request` or `invalid-settings`.
//! Streamed data arrives as `{"stream": "events", "event": …}` or
//! `{"stream": "measurements", "measurement": …}`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::protection::FunctionSettings;

use super::config::RelayConfig;
use super::events::RelayEvent;
use super::relay::{Measurement, Relay};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stream {
    Events,
    Measurements,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PingInfo {
    pub uptime_s: f64,
    pub samples: u64,
}

/// What the protocol handler needs from the relay side.
pub trait StationBackend {
    fn config(&mut self) -> RelayConfig;
    fn apply_settings(&mut self, settings: FunctionSettings) -> Result<FunctionSettings, String>;
    fn ping(&mut self) -> PingInfo;
    fn subscribe(&mut self, streams: &[Stream]);
    fn unsubscribe(&mut self, streams: &[Stream]);
}

fn ok(id: &Value, result: Value) -> Value {
    json!({"id": id, "ok": true, "result": result})
}

fn fail(id: &Value, error: &str, message: impl Into<String>) -> Value {
    json!({"id": id, "ok": false, "error": error, "message": message.into()})
}

/// Recursively overlays `patch` onto `base`. Objects merge key by key;
/// anything else replaces.
pub fn merge_json(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

fn parse_streams(req: &Map<String, Value>) -> Result<Vec<Stream>, String> {
    match req.get("streams") {
        None => Ok(vec![Stream::Events, Stream::Measurements]),
        Some(v) => {
            let list: Vec<Stream> = serde_json::from_value(v.clone()).map_err(|e| format!("streams: {e}"))?;
            Ok(list.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
        }
    }
}

fn only_fields(req: &Map<String, Value>, allowed: &[&str]) -> Result<(), String> {
    match req.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(format!("unknown field {k:?}")),
        None => Ok(()),
    }
}

/// Handles one request line and returns the reply object.
pub fn handle_station_message<B: StationBackend + ?Sized>(backend: &mut B, line: &str) -> Value {
    let null = Value::Null;
    let req: Map<String, Value> = match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(m)) => m,
        Ok(_) => return fail(&null, "malformed", "request must be a JSON object"),
        Err(e) => return fail(&null, "malformed", e.to_string()),
    };
    let id = req.get("id").cloned().unwrap_or(Value::Null);
    let op = match req.get("op") {
        Some(Value::String(op)) => op.clone(),
        Some(_) => return fail(&id, "malformed", "op must be a string"),
        None => return fail(&id, "malformed", "missing op"),
    };
    let base = ["id", "op"];
    let checked = |allowed: &[&str]| only_fields(&req, allowed).map_err(|m| fail(&id, "invalid-request", m));
    let reply = match op.as_str() {
        "get-config" => checked(&base).map(|_| {
            let cfg = backend.config();
            ok(&id, serde_json::to_value(cfg).expect("config serialises"))
        }),
        "ping" => checked(&base).map(|_| ok(&id, serde_json::to_value(backend.ping()).unwrap())),
        "subscribe" | "unsubscribe" => checked(&["id", "op", "streams"]).and_then(|_| {
            let streams = parse_streams(&req).map_err(|m| fail(&id, "invalid-request", m))?;
            if op == "subscribe" {
                backend.subscribe(&streams);
            } else {
                backend.unsubscribe(&streams);
            }
            Ok(ok(&id, json!({ "streams": streams })))
        }),
        "set-settings" => {
            let mut patch = req.clone();
            patch.remove("id");
            patch.remove("op");
            let mut current = serde_json::to_value(backend.config().settings).expect("settings serialise");
            merge_json(&mut current, &Value::Object(patch));
            match serde_json::from_value::<FunctionSettings>(current) {
                Err(e) => Err(fail(&id, "invalid-settings", e.to_string())),
                Ok(s) => match backend.apply_settings(s) {
                    Ok(applied) => Ok(ok(&id, serde_json::to_value(applied).unwrap())),
                    Err(m) => Err(fail(&id, "invalid-settings", m)),
                },
            }
        }
        other => Err(fail(&id, "unknown-op", format!("unknown op {other:?}"))),
    };
    reply.unwrap_or_else(|e| e)
}

pub fn event_message(event: &RelayEvent) -> Value {
    json!({"stream": "events", "event": event})
}

pub fn measurement_message(m: &Measurement) -> Value {
    json!({"stream": "measurements", "measurement": m})
}

/// Backend over a relay owned by the caller, for in-process use.
pub struct LocalStation<'a> {
    pub relay: &'a mut Relay,
    pub subscriptions: BTreeSet<Stream>,
    pub uptime_s: f64,
}

impl<'a> LocalStation<'a> {
    pub fn new(relay: &'a mut Relay) -> Self {
        Self {
            relay,
            subscriptions: BTreeSet::new(),
            uptime_s: 0.0,
        }
    }
}

impl StationBackend for LocalStation<'_> {
    fn config(&mut self) -> RelayConfig {
        self.relay.config().clone()
    }

    fn apply_settings(&mut self, settings: FunctionSettings) -> Result<FunctionSettings, String> {
        self.relay.apply_settings(settings).cloned().map_err(|e| e.to_string())
    }

    fn ping(&mut self) -> PingInfo {
        PingInfo {
            uptime_s: self.uptime_s,
            samples: self.relay.processed_samples(),
        }
    }

    fn subscribe(&mut self, streams: &[Stream]) {
        self.subscriptions.extend(streams.iter().copied());
    }

    fn unsubscribe(&mut self, streams: &[Stream]) {
        for s in streams {
            self.subscriptions.remove(s);
        }
    }
}
