//! Prompt assembly. Pure functions of their inputs.

use std::fmt::Write as _;

use heurgen_core::GroundTask;
use thiserror::Error;

pub const INSTRUCTIONS: &str = include_str!("../../prompts/instructions.md");
pub const SIMPLE_INSTRUCTIONS: &str = include_str!("../../prompts/instructions_simple.md");
pub const CHECKLIST: &str = include_str!("../../prompts/checklist.md");
pub const INTERFACE: &str = include_str!("../../prompts/interface.py");
pub const ENDTOEND_INSTRUCTIONS: &str = include_str!("../../prompts/endtoend_instructions.md");

/// Section headers of the heuristic prompt, in order. The instructions come
/// first, then the seven components.
pub const SECTIONS: [&str; 8] = [
    "Instructions",
    "Domain file",
    "Task files",
    "Example heuristics",
    "State representation",
    "Static information",
    "Planner interface",
    "Checklist",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("prompt component missing: {0}")]
    MissingComponent(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub name: String,
    pub domain: String,
    pub task: String,
    pub heuristic: String,
    pub plan: Option<String>,
}

macro_rules! example {
    ($name:literal, $heuristic:literal) => {
        Example {
            name: $name.into(),
            domain: include_str!(concat!("../../prompts/examples/", $name, "/domain.pddl")).into(),
            task: include_str!(concat!("../../prompts/examples/", $name, "/task.pddl")).into(),
            heuristic: include_str!(concat!("../../prompts/examples/", $heuristic)).into(),
            plan: Some(include_str!(concat!("../../prompts/examples/", $name, "/plan.txt")).into()),
        }
    };
}

/// Gripper and Logistics with their domain-dependent heuristics and
/// optimal plans.
pub fn bundled_examples() -> Vec<Example> {
    vec![
        example!("gripper", "gripper/heuristic.py"),
        example!("logistics", "logistics/heuristic.py"),
    ]
}

/// Same domains and tasks, paired with domain-independent heuristics.
pub fn independent_examples() -> Vec<Example> {
    vec![
        example!("gripper", "independent/goal_count.py"),
        example!("logistics", "independent/hadd.py"),
    ]
}

/// Per-component switches. The default is the full prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Toggles {
    /// Use the one-line request instead of the detailed instructions.
    pub replace_instruction: bool,
    pub domain: bool,
    pub tasks: bool,
    pub examples: bool,
    /// Use domain-independent example heuristics.
    pub replace_heuristics: bool,
    pub state: bool,
    pub statics: bool,
    pub interface: bool,
    pub checklist: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Self {
            replace_instruction: false,
            domain: true,
            tasks: true,
            examples: true,
            replace_heuristics: false,
            state: true,
            statics: true,
            interface: true,
            checklist: true,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PromptSpec {
    pub instructions: Option<String>,
    pub simple_instructions: Option<String>,
    pub domain: Option<String>,
    pub smallest_task: Option<String>,
    pub largest_task: Option<String>,
    pub examples: Vec<Example>,
    pub independent_examples: Vec<Example>,
    pub state_example: Option<String>,
    pub statics_example: Option<String>,
    pub interface: Option<String>,
    pub checklist: Option<String>,
    pub toggles: Toggles,
}

impl PromptSpec {
    /// Bundled texts plus the given domain and training tasks. `grounded`
    /// is the smallest training task and supplies the state and statics
    /// examples.
    pub fn bundled(domain: &str, smallest: &str, largest: &str, grounded: &GroundTask) -> Self {
        Self {
            instructions: Some(INSTRUCTIONS.into()),
            simple_instructions: Some(SIMPLE_INSTRUCTIONS.into()),
            domain: Some(domain.into()),
            smallest_task: Some(smallest.into()),
            largest_task: Some(largest.into()),
            examples: bundled_examples(),
            independent_examples: independent_examples(),
            state_example: Some(state_example(grounded)),
            statics_example: Some(statics_example(grounded)),
            interface: Some(INTERFACE.into()),
            checklist: Some(CHECKLIST.into()),
            toggles: Toggles::default(),
        }
    }
}

fn need<'a>(v: &'a Option<String>, name: &'static str) -> Result<&'a str, PromptError> {
    v.as_deref().ok_or(PromptError::MissingComponent(name))
}

fn section(out: &mut String, title: &str) {
    if !out.is_empty() {
        out.push('\n');
    }
    let _ = writeln!(out, "# {title}\n");
}

fn fenced(out: &mut String, lang: &str, body: &str) {
    let _ = writeln!(out, "```{lang}\n{}\n```", body.trim_end());
}

pub fn build_heuristic_prompt(spec: &PromptSpec) -> Result<String, PromptError> {
    let t = &spec.toggles;
    let mut out = String::new();

    section(&mut out, SECTIONS[0]);
    let text = if t.replace_instruction {
        need(&spec.simple_instructions, "simple instructions")?
    } else {
        need(&spec.instructions, "instructions")?
    };
    out.push_str(text.trim_end());
    out.push('\n');

    if t.domain {
        section(&mut out, SECTIONS[1]);
        fenced(&mut out, "pddl", need(&spec.domain, "domain file")?);
    }
    if t.tasks {
        section(&mut out, SECTIONS[2]);
        out.push_str("Smallest training task:\n\n");
        fenced(&mut out, "pddl", need(&spec.smallest_task, "smallest task")?);
        out.push_str("\nLargest training task:\n\n");
        fenced(&mut out, "pddl", need(&spec.largest_task, "largest task")?);
    }
    if t.examples {
        let pack = if t.replace_heuristics {
            &spec.independent_examples
        } else {
            &spec.examples
        };
        if pack.is_empty() {
            return Err(PromptError::MissingComponent("example heuristics"));
        }
        section(&mut out, SECTIONS[3]);
        for (i, ex) in pack.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "## {}\n\nDomain:\n", ex.name);
            fenced(&mut out, "pddl", &ex.domain);
            out.push_str("\nTask:\n\n");
            fenced(&mut out, "pddl", &ex.task);
            out.push_str("\nHeuristic:\n\n");
            fenced(&mut out, "python", &ex.heuristic);
        }
    }
    if t.state {
        section(&mut out, SECTIONS[4]);
        out.push_str(need(&spec.state_example, "state representation")?.trim_end());
        out.push('\n');
    }
    if t.statics {
        section(&mut out, SECTIONS[5]);
        out.push_str(need(&spec.statics_example, "static information")?.trim_end());
        out.push('\n');
    }
    if t.interface {
        section(&mut out, SECTIONS[6]);
        fenced(&mut out, "python", need(&spec.interface, "planner interface")?);
    }
    if t.checklist {
        section(&mut out, SECTIONS[7]);
        out.push_str(need(&spec.checklist, "checklist")?.trim_end());
        out.push('\n');
    }
    Ok(out)
}

/// Plan-generation prompt: instructions, the solved examples, then the
/// target domain and task last.
pub fn build_endtoend_prompt(domain: &str, task: &str, examples: &[Example]) -> Result<String, PromptError> {
    if examples.is_empty() {
        return Err(PromptError::MissingComponent("examples"));
    }
    let mut out = String::new();
    section(&mut out, "Instructions");
    out.push_str(ENDTOEND_INSTRUCTIONS.trim_end());
    out.push('\n');
    for (i, ex) in examples.iter().enumerate() {
        let plan = ex.plan.as_deref().filter(|p| !p.trim().is_empty());
        let plan = plan.ok_or(PromptError::MissingComponent("example plan"))?;
        section(&mut out, &format!("Example {}: {}", i + 1, ex.name));
        out.push_str("Domain:\n\n");
        fenced(&mut out, "pddl", &ex.domain);
        out.push_str("\nTask:\n\n");
        fenced(&mut out, "pddl", &ex.task);
        out.push_str("\nPlan:\n\n");
        fenced(&mut out, "", plan);
    }
    section(&mut out, "Domain");
    fenced(&mut out, "pddl", domain);
    section(&mut out, "Task");
    fenced(&mut out, "pddl", task);
    Ok(out)
}

/// Shows how a state of `task` reaches the heuristic: the atom table and
/// the initial state as ids.
pub fn state_example(task: &GroundTask) -> String {
    let mut out = format!(
        "States are frozensets of atom ids. Atom ids index `task.atoms`. For task {} the atoms are:\n\n",
        task.problem_name
    );
    for a in &task.atoms {
        let _ = writeln!(out, "    {:>4}  {}", a.index, a.text);
    }
    let ids: Vec<String> = task.init.atoms().map(|i| i.to_string()).collect();
    let _ = write!(out, "\nThe initial state is\n\n    frozenset({{{}}})\n", ids.join(", "));
    out
}

/// Lists the static atoms of `task` as the heuristic sees them.
pub fn statics_example(task: &GroundTask) -> String {
    if task.static_atoms.is_empty() {
        return format!(
            "`task.statics` holds the ids of atoms no action changes. Task {} has none.\n",
            task.problem_name
        );
    }
    let mut out = format!(
        "`task.statics` holds the ids of atoms no action changes. They are also part of every state. For task {}:\n\n",
        task.problem_name
    );
    for &i in &task.static_atoms {
        let _ = writeln!(out, "    {:>4}  {}", i, task.atoms[i].text);
    }
    out
}
