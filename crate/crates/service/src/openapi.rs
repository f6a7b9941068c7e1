//! Hand-written OpenAPI description served at `/api/spec`.

use serde_json::{json, Value};

fn op(summary: &str, request: Value, response: Value) -> Value {
    json!({
        "summary": summary,
        "requestBody": { "content": { "application/json": { "schema": request } } },
        "responses": {
            "200": { "content": { "application/json": { "schema": response } } },
            "400": { "$ref": "#/components/responses/Malformed" },
            "422": { "$ref": "#/components/responses/DomainError" }
        }
    })
}

fn obj(required: &[&str], props: Value) -> Value {
    json!({ "type": "object", "required": required, "properties": props })
}

pub fn document() -> Value {
    let prob = json!({ "type": "number", "minimum": 0, "maximum": 1 });
    let test = json!({ "sens": prob, "spec": prob });
    let predictive = obj(
        &["sens", "spec", "prev"],
        json!({ "sens": prob, "spec": prob, "prev": prob }),
    );
    let value = obj(&["value"], json!({ "value": { "type": "number" } }));
    let plan = obj(
        &["status", "target_rho", "prior"],
        json!({
            "raw_n": { "type": ["number", "null"] },
            "n_i": { "type": ["integer", "null"] },
            "status": { "enum": ["AlreadyMet", "Planned", "NonInformativeTest"] },
            "target_rho": prob,
            "prior": prob
        }),
    );
    let session = json!({ "$ref": "#/components/schemas/Session" });

    json!({
        "openapi": "3.0.3",
        "info": { "title": "screening calculator", "version": env!("CARGO_PKG_VERSION") },
        "paths": {
            "/api/ppv": { "post": op("Positive predictive value", predictive.clone(), value.clone()) },
            "/api/npv": { "post": op("Negative predictive value", predictive.clone(), value.clone()) },
            "/api/threshold": { "post": op(
                "Prevalence threshold and epsilon",
                obj(&["sens", "spec"], test.clone()),
                obj(&["value", "epsilon"], json!({ "value": prob, "epsilon": { "type": "number" } }))
            ) },
            "/api/iterations": { "post": op(
                "Consecutive positives needed to reach a target PPV",
                obj(&["prev", "target"], json!({
                    "sens": prob, "spec": prob, "log_lr": { "type": "number" },
                    "prev": prob, "target": prob
                })),
                plan
            ) },
            "/api/sequential-ppv": { "post": op(
                "PPV after n consecutive positives",
                obj(&["sens", "spec", "prev", "n"], json!({
                    "sens": prob, "spec": prob, "prev": prob, "n": { "type": "integer", "minimum": 1 }
                })),
                value
            ) },
            "/api/curve": { "post": op(
                "PPV or NPV sampled over priors",
                obj(&["kind", "sens", "spec"], json!({
                    "kind": { "enum": ["ppv", "npv"] }, "sens": prob, "spec": prob,
                    "points": { "type": "integer", "default": 200 },
                    "grid": { "type": "array", "items": prob }
                })),
                obj(&["points"], json!({ "points": { "type": "array" }, "threshold": { "type": ["number", "null"] } }))
            ) },
            "/api/table": { "post": op(
                "Reference table of raw and ceiled iteration counts",
                obj(&["target"], json!({
                    "target": prob, "axes": { "enum": ["paper", "custom"] },
                    "log_lr_values": { "type": "array", "items": { "type": "number" } },
                    "phi_values": { "type": "array", "items": prob }
                })),
                obj(&["cells", "ceiled"], json!({ "cells": { "type": "array" }, "ceiled": { "type": "array" } }))
            ) },
            "/api/surface": { "post": op(
                "Dense (ln LR+, prior, raw_n) grid",
                obj(&["target", "log_lr", "phi"], json!({
                    "target": prob,
                    "log_lr": { "$ref": "#/components/schemas/Range" },
                    "phi": { "$ref": "#/components/schemas/Range" }
                })),
                obj(&["points"], json!({ "points": { "type": "array" } }))
            ) },
            "/api/session": { "post": op(
                "Start a sequential-testing session",
                obj(&["sens", "spec", "prior"], json!({ "sens": prob, "spec": prob, "prior": prob, "target": prob })),
                session.clone()
            ) },
            "/api/session/{id}": { "get": {
                "summary": "Session state",
                "responses": { "200": { "content": { "application/json": { "schema": session } } }, "404": {} }
            } },
            "/api/session/{id}/result": {
                "post": op(
                    "Record a result and update the posterior",
                    obj(&["result"], json!({ "result": { "enum": ["+", "-"] } })),
                    session.clone()
                ),
                "delete": {
                    "summary": "Undo the last result",
                    "responses": { "200": { "content": { "application/json": { "schema": session } } }, "404": {}, "409": {} }
                }
            }
        },
        "components": {
            "schemas": {
                "Range": obj(&["start", "stop", "step"], json!({
                    "start": { "type": "number" }, "stop": { "type": "number" }, "step": { "type": "number" }
                })),
                "Session": obj(&["id", "trajectory", "results"], json!({
                    "id": { "type": "string" },
                    "sensitivity": prob, "specificity": prob, "initial_prior": prob,
                    "target_rho": { "type": ["number", "null"] },
                    "results": { "type": "array", "items": { "enum": ["+", "-"] } },
                    "trajectory": { "type": "array", "items": prob },
                    "current": prob,
                    "created_at": { "type": "integer" },
                    "remaining": { "type": "object" }
                }))
            },
            "responses": {
                "Malformed": { "description": "Body is not valid JSON for this endpoint" },
                "DomainError": {
                    "description": "Typed domain error",
                    "content": { "application/json": { "schema": obj(&["error", "message"], json!({
                        "error": { "type": "string" }, "message": { "type": "string" }
                    })) } }
                }
            }
        }
    })
}
