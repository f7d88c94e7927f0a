use super::{Game, GameDef, ModelError};

/// Renders a game in the JSON game-file format.
pub fn serialize(game: &Game) -> String {
    serde_json::to_string_pretty(game.def()).expect("game definitions always serialize")
}

pub fn deserialize(text: &str) -> Result<Game, ModelError> {
    let def: GameDef = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(Game::new(def))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cmp, Location, Owner, Transition};

    fn small() -> Game {
        Game::new(GameDef {
            clocks: vec!["x".into()],
            locations: vec![
                Location::new("a", Owner::Min, 2),
                Location::new("g", Owner::Goal, 0),
            ],
            transitions: vec![Transition::new("t", "a", "g").guard("x", Cmp::Eq, 1)],
            initial: "a".into(),
        })
    }

    #[test]
    fn roundtrip_small_game() {
        let g = small();
        let back = deserialize(&serialize(&g)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn file_uses_documented_keys() {
        let text = serialize(&small());
        for key in [
            "\"clocks\"",
            "\"locations\"",
            "\"transitions\"",
            "\"initial\"",
            "\"owner\": \"MIN\"",
            "\"op\": \"=\"",
            "\"resets\"",
        ] {
            assert!(text.contains(key), "missing {key} in {text}");
        }
    }

    #[test]
    fn missing_owner_is_a_parse_error() {
        let text = r#"{"clocks":["x"],"locations":[{"id":"a","weight":0}],"transitions":[],"initial":"a"}"#;
        match deserialize(text) {
            Err(ModelError::Parse { line, message, .. }) => {
                assert_eq!(line, 1);
                assert!(message.contains("owner"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
