//! Prompt templates and rendering into (prefix, target) pairs.
//!
//! A rendered prompt is laid out as
//!
//! ```text
//! instruction SEP demo_1 SEP ... demo_K SEP frame-up-to-target | target
//! ```
//!
//! where `SEP` is a blank line. Boolean-QA dialogue templates join the
//! instruction to the question with a single newline instead. The prefix ends
//! right before the first byte of the target, so connective whitespace is part
//! of the prefix.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::{GenSample, SystemOutput};
use crate::error::{Error, Result};
use crate::task::{Direction, Setting, Task};

pub const SEP: &str = "\n\n";

pub const SRC: &str = "src";
pub const REF: &str = "ref";
pub const HYPO: &str = "hypo";
pub const HISTORY: &str = "History";
pub const ANSWER: &str = "answer";

const PLACEHOLDERS: [&str; 5] = [SRC, REF, HYPO, HISTORY, ANSWER];

/// The fixed continuation scored for boolean-QA dialogue prompts.
pub const YES_ANSWER: &str = " Yes.";
pub const DIALOGUE_INSTRUCTION: &str =
    "Answer the question based on the conversation between a human and AI.";

const SUMM_FRAME: &str = "{src} Tl;dr {hypo}";
const PARAPHRASE_FRAME: &str = "{ref} In other words, {hypo}";
const PARAPHRASE_FRAME_REV: &str = "{hypo} In other words, {ref}";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub task: Task,
    pub aspect: String,
    pub direction: Direction,
    pub instruction: String,
    pub frame: String,
    pub target_marker: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

fn parse_frame(frame: &str) -> Vec<Piece<'_>> {
    let mut pieces = Vec::new();
    let mut literal_start = 0;
    let mut pos = 0;
    while let Some(rel) = frame[pos..].find('{') {
        let open = pos + rel;
        let slot = frame[open + 1..]
            .find('}')
            .map(|close| &frame[open + 1..open + 1 + close])
            .filter(|name| PLACEHOLDERS.contains(name));
        match slot {
            Some(name) => {
                if open > literal_start {
                    pieces.push(Piece::Text(&frame[literal_start..open]));
                }
                pieces.push(Piece::Slot(name));
                pos = open + name.len() + 2;
                literal_start = pos;
            }
            None => pos = open + 1,
        }
    }
    if literal_start < frame.len() {
        pieces.push(Piece::Text(&frame[literal_start..]));
    }
    pieces
}

impl PromptTemplate {
    pub fn id(&self) -> String {
        format!("{}/{}/{}", self.task, self.aspect, self.direction)
    }

    /// Placeholders used by the frame, in order of first appearance.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for p in parse_frame(&self.frame) {
            if let Piece::Slot(name) = p {
                if !seen.contains(&name) {
                    seen.push(name);
                }
            }
        }
        seen
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidTemplate(format!("{}: {m}", self.id())));
        let pieces = parse_frame(&self.frame);
        let hits = pieces
            .iter()
            .filter(|p| **p == Piece::Slot(self.target_marker.as_str()))
            .count();
        if hits != 1 {
            return bad(format!(
                "frame must contain {{{}}} exactly once (found {hits})",
                self.target_marker
            ));
        }
        if pieces.last() != Some(&Piece::Slot(self.target_marker.as_str())) {
            return bad("the target placeholder must close the frame".into());
        }
        if (self.direction == Direction::BooleanQA) != self.task.is_dialogue() {
            return bad("boolean-QA templates are exactly the dialogue templates".into());
        }
        if self.direction == Direction::RefBidir {
            return bad("store RefToHypo and HypoToRef rows instead of RefBidir".into());
        }
        Ok(())
    }

    /// Boolean-QA dialogue template asking `question`.
    pub fn boolean_qa(task: Task, aspect: &str, question: &str) -> Self {
        PromptTemplate {
            task,
            aspect: aspect.to_string(),
            direction: Direction::BooleanQA,
            instruction: DIALOGUE_INSTRUCTION.to_string(),
            frame: format!(
                "Question: {question} (a) Yes. (b) No.\nConversation: {{{HISTORY}}}\nAnswer:{{{ANSWER}}}"
            ),
            target_marker: ANSWER.to_string(),
        }
    }

    /// The aspect question of a boolean-QA template.
    pub fn question(&self) -> Option<&str> {
        let rest = self.frame.strip_prefix("Question: ")?;
        let end = rest.find(" (a) Yes. (b) No.")?;
        Some(&rest[..end])
    }

    /// Copy of this template that asks `text` (boolean-QA) or uses `text` as
    /// the instruction (all other directions).
    pub fn with_definition(&self, text: &str) -> Self {
        if self.direction == Direction::BooleanQA {
            Self::boolean_qa(self.task, &self.aspect, text)
        } else {
            PromptTemplate {
                instruction: text.to_string(),
                ..self.clone()
            }
        }
    }

    fn instruction_sep(&self) -> &'static str {
        if self.direction == Direction::BooleanQA {
            "\n"
        } else {
            SEP
        }
    }
}

/// Placeholder values for one instantiation of a frame.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    pub bindings: BTreeMap<String, String>,
}

impl Demonstration {
    pub fn new<K: Into<String>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        Demonstration {
            bindings: pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    /// Exemplar built from a sample and one of its outputs.
    pub fn from_sample(sample: &GenSample, output: &SystemOutput) -> Self {
        let mut d = Demonstration::default();
        d.bindings.insert(SRC.into(), sample.source.clone());
        if let Some(r) = sample.first_reference() {
            d.bindings.insert(REF.into(), r.to_string());
        }
        d.bindings.insert(HYPO.into(), output.text.clone());
        d.bindings
            .insert(HISTORY.into(), join_history(&sample.source, &output.text));
        d.bindings.insert(ANSWER.into(), YES_ANSWER.into());
        d
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptMeta {
    pub template_id: String,
    pub k: usize,
    pub setting: Setting,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub prefix: String,
    pub target: String,
    pub meta: PromptMeta,
}

impl RenderedPrompt {
    pub fn full(&self) -> String {
        let mut s = String::with_capacity(self.prefix.len() + self.target.len());
        s.push_str(&self.prefix);
        s.push_str(&self.target);
        s
    }
}

fn lookup<'a>(bindings: &'a BTreeMap<String, String>, name: &str) -> Option<&'a str> {
    bindings.get(name).map(String::as_str)
}

/// Renders `tpl` for already-resolved placeholder values.
pub fn render_bindings(
    tpl: &PromptTemplate,
    setting: Setting,
    values: &BTreeMap<String, String>,
    demos: &[Demonstration],
) -> Result<RenderedPrompt> {
    tpl.validate()?;
    if !demos.is_empty() && setting != Setting::Idm {
        return Err(Error::Usage(format!(
            "{} demonstrations given with setting {setting}; demonstrations need IDM",
            demos.len()
        )));
    }
    let pieces = parse_frame(&tpl.frame);
    for (index, d) in demos.iter().enumerate() {
        if let Some(missing) = tpl
            .placeholders()
            .into_iter()
            .find(|p| !d.bindings.contains_key(*p))
        {
            return Err(Error::DemoNotCovering {
                index,
                placeholder: missing.to_string(),
            });
        }
    }

    let mut prefix = String::new();
    if setting.has_instruction() && !tpl.instruction.is_empty() {
        prefix.push_str(&tpl.instruction);
        prefix.push_str(tpl.instruction_sep());
    }
    for d in demos {
        for p in &pieces {
            match p {
                Piece::Text(t) => prefix.push_str(t),
                Piece::Slot(name) => prefix.push_str(lookup(&d.bindings, name).unwrap_or_default()),
            }
        }
        prefix.push_str(SEP);
    }
    let mut target = None;
    for p in &pieces {
        match p {
            Piece::Text(t) => prefix.push_str(t),
            Piece::Slot(name) => {
                let v = lookup(values, name)
                    .ok_or_else(|| Error::MissingPlaceholder(name.to_string()))?;
                if *name == tpl.target_marker {
                    target = Some(v.to_string());
                } else {
                    prefix.push_str(v);
                }
            }
        }
    }
    let target = target.expect("validated frame has a target");
    if target.is_empty() {
        return Err(Error::Invalid(format!(
            "{}: target {{{}}} is empty",
            tpl.id(),
            tpl.target_marker
        )));
    }
    Ok(RenderedPrompt {
        prefix,
        target,
        meta: PromptMeta {
            template_id: tpl.id(),
            k: demos.len(),
            setting,
        },
    })
}

fn join_history(history: &str, response: &str) -> String {
    match (history.is_empty(), response.is_empty()) {
        (true, _) => response.to_string(),
        (_, true) => history.to_string(),
        _ => format!("{history}\n{response}"),
    }
}

/// Placeholder values for evaluating `output` of `sample` under `tpl`.
/// Multi-reference samples use their first reference.
pub fn bindings_for(
    tpl: &PromptTemplate,
    sample: &GenSample,
    output: &SystemOutput,
) -> BTreeMap<String, String> {
    let mut b = BTreeMap::new();
    let used = tpl.placeholders();
    if used.contains(&SRC) {
        b.insert(SRC.to_string(), sample.source.clone());
    }
    if used.contains(&REF) {
        if let Some(r) = sample.first_reference() {
            b.insert(REF.to_string(), r.to_string());
        }
    }
    if used.contains(&HYPO) {
        b.insert(HYPO.to_string(), output.text.clone());
    }
    if used.contains(&HISTORY) {
        b.insert(
            HISTORY.to_string(),
            join_history(&sample.source, &output.text),
        );
    }
    if used.contains(&ANSWER) {
        b.insert(ANSWER.to_string(), YES_ANSWER.to_string());
    }
    b
}

pub fn render(
    tpl: &PromptTemplate,
    setting: Setting,
    sample: &GenSample,
    output: &SystemOutput,
    demos: &[Demonstration],
) -> Result<RenderedPrompt> {
    render_bindings(tpl, setting, &bindings_for(tpl, sample, output), demos)
}

/// Boolean-QA prompt for a dialogue. For turn-level templates the response is
/// appended to the history as its final turn; for dialogue-level templates
/// `history` is the full conversation and `response` may be empty.
pub fn render_dialogue(
    tpl: &PromptTemplate,
    history: &str,
    response: &str,
) -> Result<RenderedPrompt> {
    if tpl.direction != Direction::BooleanQA || !tpl.task.is_dialogue() {
        return Err(Error::InvalidTemplate(format!(
            "{} is not a dialogue boolean-QA template",
            tpl.id()
        )));
    }
    let values = BTreeMap::from([
        (HISTORY.to_string(), join_history(history, response)),
        (ANSWER.to_string(), YES_ANSWER.to_string()),
    ]);
    render_bindings(tpl, Setting::Ist, &values, &[])
}

/// Picks `k` demonstrations uniformly without replacement, in draw order.
pub fn select_demos(pool: &[Demonstration], k: usize, seed: u64) -> Result<Vec<Demonstration>> {
    if k > pool.len() {
        return Err(Error::OutOfRange {
            what: "demonstration count",
            value: k,
            expected: format!("0..={}", pool.len()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, pool.len(), k)
        .into_iter()
        .map(|i| pool[i].clone())
        .collect())
}

type TemplateKey = (Task, String, Direction);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateRegistry {
    templates: Vec<PromptTemplate>,
    index: HashMap<TemplateKey, usize>,
}

impl TemplateRegistry {
    pub fn new(templates: Vec<PromptTemplate>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, t) in templates.iter().enumerate() {
            t.validate()?;
            if index
                .insert((t.task, t.aspect.clone(), t.direction), i)
                .is_some()
            {
                return Err(Error::InvalidTemplate(format!(
                    "duplicate template {}",
                    t.id()
                )));
            }
        }
        Ok(TemplateRegistry { templates, index })
    }

    /// Template for `(task, aspect, direction)`. `RefBidir` resolves to the
    /// `RefToHypo` row; both halves share one instruction.
    pub fn get(&self, task: Task, aspect: &str, direction: Direction) -> Result<&PromptTemplate> {
        let direction = match direction {
            Direction::RefBidir => Direction::RefToHypo,
            d => d,
        };
        self.index
            .get(&(task, aspect.to_string(), direction))
            .map(|&i| &self.templates[i])
            .ok_or_else(|| Error::MissingTemplate {
                task: task.to_string(),
                aspect: aspect.to_string(),
                direction: direction.to_string(),
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = &PromptTemplate> {
        self.templates.iter()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Aspects with at least one template for `task`.
    pub fn aspects_for(&self, task: Task) -> BTreeSet<&str> {
        self.templates
            .iter()
            .filter(|t| t.task == task)
            .map(|t| t.aspect.as_str())
            .collect()
    }

    /// Copy in which every row of `(task, aspect)` uses `definition` in place
    /// of its question or instruction.
    pub fn with_definition(&self, task: Task, aspect: &str, definition: &str) -> Result<Self> {
        let mut found = false;
        let templates = self
            .templates
            .iter()
            .map(|t| {
                if t.task == task && t.aspect == aspect {
                    found = true;
                    t.with_definition(definition)
                } else {
                    t.clone()
                }
            })
            .collect();
        if !found {
            return Err(Error::MissingTemplate {
                task: task.to_string(),
                aspect: aspect.to_string(),
                direction: "any".into(),
            });
        }
        Self::new(templates)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.templates).expect("templates serialize")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::new(serde_json::from_str(json)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

const SUMM_ROWS: [(&str, &str, &str); 7] = [
    (
        "FAC",
        "Generate a summary with consistent facts for the following text:",
        "Rewrite the following text with consistent facts.",
    ),
    (
        "COV",
        "Generate a summary with as much semantic coverage as possible for the following text:",
        "Rewrite the following text with the same semantics.",
    ),
    (
        "CON",
        "Generate factually consistent summary for the following text:",
        "Rewrite the following text with consistent facts.",
    ),
    (
        "INF",
        "Generate an informative summary that captures the key points of the following text:",
        "Rewrite the following text with its core information.",
    ),
    (
        "COH",
        "Generate a coherent summary for the following text:",
        "Rewrite the following text into a coherent text.",
    ),
    (
        "REL",
        "Generate a relevant summary with consistent details for the following text:",
        "Rewrite the following text with consistent details.",
    ),
    (
        "FLU",
        "Generate a fluent and grammatical summary for the following text:",
        "Rewrite the following text into a fluent and grammatical text.",
    ),
];

const MT_ROWS: [(&str, &str); 3] = [
    (
        "ACC",
        "Rewrite the following text with its core information and consistent facts:",
    ),
    (
        "FLU",
        "Rewrite the following text to make it more grammatical and well-written:",
    ),
    (
        "MQM",
        "Rewrite the following text into high-quality text with its core information:",
    ),
];

const D2T_ROWS: [(&str, &str); 3] = [
    ("INF", "Convert the following text to another expression that preserves key information:"),
    ("NAT", "Convert the following text into another expression that is human-like and natural:"),
    (
        "FLU",
        "Convert the following text into another expression that preserves key information and is human-like and natural:",
    ),
];

const TURN_QUESTIONS: [(&str, &str); 8] = [
    ("INT", "Are the responses of AI interesting?"),
    ("ENG", "Are the responses of AI engaging?"),
    ("UND", "Are the responses of AI understandable?"),
    (
        "REL",
        "Are the responses of AI relevant to the conversation?",
    ),
    (
        "SPE",
        "Are the responses of AI generic or specific to the conversation?",
    ),
    ("COR", "Are the responses of AI correct to conversations?"),
    ("SEM", "Are the responses of AI semantically appropriate?"),
    ("FLU", "Are the responses of AI fluently written?"),
];

const DIALOG_QUESTIONS: [(&str, &str); 10] = [
    ("COH", "Is the AI coherent and maintains a good conversation flow throughout the conversation?"),
    ("DIV", "Is there diversity in the AI responses?"),
    ("FLE", "Is the AI flexible and adaptable to human and their interests?"),
    ("UND", "Does the AI seem to understand the human?"),
    ("INQ", "Is the AI inquisitive throughout the conversation?"),
    ("CON", "Are the responses of AI consistent in the information it provides throughout the conversation?"),
    ("INF", "Are the responses of AI informative throughout the conversation?"),
    ("LIK", "Does the AI display a likeable personality?"),
    ("DEP", "Does the AI discuss topics in depth?"),
    ("ERR", "Is the AI able to recover from errors that it makes?"),
];

fn template(
    task: Task,
    aspect: &str,
    direction: Direction,
    instruction: &str,
    frame: &str,
) -> PromptTemplate {
    let target_marker = match direction {
        Direction::HypoToRef => REF,
        _ => HYPO,
    };
    PromptTemplate {
        task,
        aspect: aspect.to_string(),
        direction,
        instruction: instruction.to_string(),
        frame: frame.to_string(),
        target_marker: target_marker.to_string(),
    }
}

fn paraphrase_pair(task: Task, aspect: &str, instruction: &str) -> [PromptTemplate; 2] {
    [
        template(
            task,
            aspect,
            Direction::RefToHypo,
            instruction,
            PARAPHRASE_FRAME,
        ),
        template(
            task,
            aspect,
            Direction::HypoToRef,
            instruction,
            PARAPHRASE_FRAME_REV,
        ),
    ]
}

/// Every instruction row for summarization, translation, data-to-text, and
/// both dialogue granularities.
pub fn builtin_templates() -> TemplateRegistry {
    let mut all = Vec::new();
    for (aspect, src_instr, ref_instr) in SUMM_ROWS {
        all.push(template(
            Task::Summ,
            aspect,
            Direction::SrcToHypo,
            src_instr,
            SUMM_FRAME,
        ));
        all.extend(paraphrase_pair(Task::Summ, aspect, ref_instr));
    }
    for (aspect, instr) in MT_ROWS {
        all.extend(paraphrase_pair(Task::Mt, aspect, instr));
    }
    for (aspect, instr) in D2T_ROWS {
        all.extend(paraphrase_pair(Task::D2t, aspect, instr));
    }
    for (aspect, q) in TURN_QUESTIONS {
        all.push(PromptTemplate::boolean_qa(Task::DiagTurn, aspect, q));
    }
    for (aspect, q) in DIALOG_QUESTIONS {
        all.push(PromptTemplate::boolean_qa(Task::DiagDialog, aspect, q));
    }
    TemplateRegistry::new(all).expect("builtin templates are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flu() -> PromptTemplate {
        builtin_templates()
            .get(Task::Summ, "FLU", Direction::SrcToHypo)
            .unwrap()
            .clone()
    }

    fn vals(src: &str, hypo: &str) -> BTreeMap<String, String> {
        BTreeMap::from([(SRC.into(), src.into()), (HYPO.into(), hypo.into())])
    }

    #[test]
    fn summarization_fluency_example() {
        let p = render_bindings(&flu(), Setting::Ist, &vals("T.", "S."), &[]).unwrap();
        assert_eq!(
            p.prefix,
            "Generate a fluent and grammatical summary for the following text:\n\nT. Tl;dr "
        );
        assert_eq!(p.target, "S.");
        assert_eq!(p.full(), format!("{}{}", p.prefix, p.target));

        let v = render_bindings(&flu(), Setting::Val, &vals("T.", "S."), &[]).unwrap();
        assert_eq!(v.prefix, "T. Tl;dr ");
        assert_eq!(v.target, "S.");
    }

    #[test]
    fn two_demos_hand_instantiated() {
        let demos = [
            Demonstration::new([(SRC, "D1."), (HYPO, "E1.")]),
            Demonstration::new([(SRC, "D2."), (HYPO, "E2.")]),
        ];
        let p = render_bindings(&flu(), Setting::Idm, &vals("T.", "S."), &demos).unwrap();
        let expected =
            String::from("Generate a fluent and grammatical summary for the following text:")
                + "\n\n"
                + "D1. Tl;dr E1."
                + "\n\n"
                + "D2. Tl;dr E2."
                + "\n\n"
                + "T. Tl;dr ";
        assert_eq!(p.prefix, expected);
        assert_eq!(p.meta.k, 2);
    }

    #[test]
    fn demo_must_cover_frame() {
        let demos = [Demonstration::new([(SRC, "D1.")])];
        let err = render_bindings(&flu(), Setting::Idm, &vals("T.", "S."), &demos).unwrap_err();
        assert!(
            matches!(err, Error::DemoNotCovering { index: 0, ref placeholder } if placeholder == HYPO)
        );
    }

    #[test]
    fn missing_value() {
        let tpl = builtin_templates()
            .get(Task::Mt, "ACC", Direction::RefToHypo)
            .unwrap()
            .clone();
        let err = render_bindings(&tpl, Setting::Ist, &vals("src", "hyp"), &[]).unwrap_err();
        assert!(matches!(err, Error::MissingPlaceholder(p) if p == REF));
    }

    #[test]
    fn no_resubstitution() {
        let p = render_bindings(&flu(), Setting::Ist, &vals("{hypo} {src}", "{ref}"), &[]).unwrap();
        assert!(p.prefix.ends_with("{hypo} {src} Tl;dr "));
        assert_eq!(p.target, "{ref}");
    }

    #[test]
    fn dialogue_prompt_layout() {
        let reg = builtin_templates();
        let tpl = reg
            .get(Task::DiagTurn, "FLU", Direction::BooleanQA)
            .unwrap();
        let p = render_dialogue(tpl, "Human: Hi", "AI: Hello").unwrap();
        assert_eq!(
            p.prefix,
            "Answer the question based on the conversation between a human and AI.\n\
             Question: Are the responses of AI fluently written? (a) Yes. (b) No.\n\
             Conversation: Human: Hi\nAI: Hello\nAnswer:"
        );
        assert_eq!(p.target, " Yes.");

        let coh = reg
            .get(Task::DiagDialog, "COH", Direction::BooleanQA)
            .unwrap();
        assert_eq!(
            coh.question(),
            Some("Is the AI coherent and maintains a good conversation flow throughout the conversation?")
        );
        assert!(render_dialogue(&flu(), "h", "r").is_err());
    }

    #[test]
    fn builtin_rows() {
        let reg = builtin_templates();
        assert_eq!(reg.len(), 7 * 3 + 3 * 2 + 3 * 2 + 8 + 10);
        assert_eq!(
            reg.get(Task::Mt, "ACC", Direction::RefBidir)
                .unwrap()
                .instruction,
            "Rewrite the following text with its core information and consistent facts:"
        );
        assert_eq!(
            reg.get(Task::D2t, "NAT", Direction::RefBidir)
                .unwrap()
                .instruction,
            "Convert the following text into another expression that is human-like and natural:"
        );
        assert_eq!(
            reg.get(Task::Summ, "COV", Direction::SrcToHypo)
                .unwrap()
                .instruction,
            "Generate a summary with as much semantic coverage as possible for the following text:"
        );
        let rev = reg.get(Task::Mt, "FLU", Direction::HypoToRef).unwrap();
        assert_eq!(rev.frame, "{hypo} In other words, {ref}");
        assert_eq!(rev.target_marker, REF);
        assert!(reg.get(Task::Mt, "ACC", Direction::SrcToHypo).is_err());
    }

    #[test]
    fn select_demos_contract() {
        let pool: Vec<_> = (0..6)
            .map(|i| Demonstration::new([(SRC, format!("s{i}")), (HYPO, format!("h{i}"))]))
            .collect();
        assert!(select_demos(&pool, 0, 3).unwrap().is_empty());
        let a = select_demos(&pool, 4, 1).unwrap();
        assert_eq!(a, select_demos(&pool, 4, 1).unwrap());
        let mut all = select_demos(&pool, 6, 9).unwrap();
        all.sort_by(|x, y| x.bindings[SRC].cmp(&y.bindings[SRC]));
        assert_eq!(all, pool);
        assert!(matches!(
            select_demos(&pool, 7, 0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn template_validation() {
        let mut t = flu();
        t.frame = "{src} Tl;dr".into();
        assert!(t.validate().is_err());
        t.frame = "{hypo} {src}".into();
        assert!(t.validate().is_err());
        t.frame = "{hypo} {hypo}".into();
        assert!(t.validate().is_err());
    }

    #[test]
    fn registry_json_round_trip() {
        let reg = builtin_templates();
        assert_eq!(TemplateRegistry::from_json(&reg.to_json()).unwrap(), reg);
    }
}
