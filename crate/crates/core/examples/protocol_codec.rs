//! Encode a question, parse it back, and check engine replies against the contract.

use instant_assist::protocol::{encode_request, parse_request, parse_response, render_response, AnswerText, KeyConfig};
use instant_assist::validate_response_contract;

fn main() {
    let keys = KeyConfig::default();
    let body = encode_request("  what is flood stage?  ", &keys);
    println!("request body: {body}");
    let question = parse_request(body.as_bytes(), "application/x-www-form-urlencoded", &keys).unwrap();
    println!("parsed question: {:?}", question.as_str());

    // JSON bodies work too, with whatever keys the page is configured for.
    let custom = KeyConfig::new("q", "answer").unwrap();
    let question = parse_request(br#"{"q": "is it raining"}"#, "application/json", &custom).unwrap();
    println!("custom-key question: {:?}", question.as_str());

    let reply = render_response(&AnswerText::new("About 4.2 m.").unwrap(), &keys);
    println!("reply: {}", String::from_utf8_lossy(&reply));
    println!("round trip: {:?}", parse_response(&reply, &keys).map(|a| a.into_string()));

    for bad in [&b"<html>oops</html>"[..], br#"{"answer": "42"}"#, br#"{"resultText": 42}"#, br#"{"resultText": ""}"#] {
        let report = validate_response_contract(bad, &keys);
        println!("{:<24} -> {:?}", String::from_utf8_lossy(bad), report.first_code());
    }
}
