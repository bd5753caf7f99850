/** Entry point: wires the survey flow and the what-if explorer into the
 * page. All computation happens server-side; this file only moves data
 * between the gateway and the DOM. */

import { ApiClient, ApiError } from "./api.js";
import { CLASS_NAMES } from "./matrix.js";
import {
  birdseyeSvg,
  el,
  lockedTargetRow,
  matrixGrid,
  metricsTable,
  precisionPie,
  sliderRow,
  zonesTable,
} from "./render.js";
import { SurveyFlow } from "./survey.js";
import { WhatIfController } from "./whatif.js";

const PERSPECTIVE_TEXT: Record<string, string> = {
  passenger:
    "You are a passenger of the self-driving car. Judge each confusion " +
    "from inside the vehicle.",
  external:
    "You are an external traffic participant (pedestrian, cyclist, other " +
    "driver). Judge each confusion from outside the vehicle.",
};

const PRESETS = ["passenger", "external", "female", "male", "robot"] as const;

function getRoot(): HTMLElement {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  return root;
}

function banner(perspective: string): HTMLElement {
  const div = el("div", "perspective-banner");
  div.append(
    el("strong", "", `Perspective: ${perspective}`),
    el("span", "", PERSPECTIVE_TEXT[perspective] ?? ""),
  );
  return div;
}

function surveyPage(api: ApiClient): HTMLElement {
  const page = el("section", "survey-page");
  const flow = new SurveyFlow(api);
  const status = el("div", "status", "Starting session ...");
  page.append(status);

  const renderScene = () => {
    page.replaceChildren();
    if (!flow.session) return;
    page.append(banner(flow.session.perspective));
    if (flow.state === "finished" || !flow.scenario) {
      page.append(finalPage(api, flow));
      return;
    }
    const scenario = flow.scenario;
    page.append(
      el(
        "p",
        "scene-reminder",
        `Scene ${flow.submitted + 1}: the highlighted object really is ` +
          `"${scenario.class_name}". As a ${flow.session.perspective}, ` +
          "how severe is it if the system mistakes it for each class " +
          "below? (reference: confusing a car with a bus = 1)",
      ),
    );
    const img = document.createElement("img");
    img.src = scenario.image_url;
    img.alt = `street scene with a highlighted ${scenario.class_name}`;
    img.className = "scene-image";
    page.append(img);

    const panel = el("div", "slider-panel");
    for (let j = 1; j <= CLASS_NAMES.length; j++) {
      const name = CLASS_NAMES[j - 1]!;
      if (j === scenario.target_class) {
        panel.append(lockedTargetRow(name));
      } else {
        panel.append(
          sliderRow(j, name, {
            onChange: (cls, exponent) => {
              flow.setSeverity(cls, exponent);
              submit.disabled = !flow.canSubmit;
            },
            onConfirm: (cls) => {
              flow.confirmDefault(cls);
              submit.disabled = !flow.canSubmit;
            },
          }),
        );
      }
    }
    page.append(panel);

    const submit = el("button", "submit-scene", "Submit ratings");
    submit.disabled = true;
    const note = el("div", "status", "");
    submit.addEventListener("click", () => {
      void flow
        .submit()
        .then((status) => {
          if (status === "queued") {
            note.textContent =
              "Connection lost; your answer is queued. Retrying ...";
            return flow.retryPending().then((moved) => {
              if (moved) renderScene();
            });
          }
          renderScene();
          return undefined;
        })
        .catch((err) => {
          note.textContent =
            err instanceof ApiError ? err.detail : String(err);
        });
    });
    page.append(submit, note);
  };

  void flow.start().then(renderScene, (err) => {
    status.textContent = `Could not start the survey: ${err}`;
  });
  return page;
}

function finalPage(api: ApiClient, flow: SurveyFlow): HTMLElement {
  const wrap = el("div", "final-page");
  wrap.append(
    el("h2", "", "Thank you!"),
    el(
      "p",
      "",
      `You rated ${flow.submitted} scene(s). A few optional questions ` +
        "to close:",
    ),
  );
  const difficulty = document.createElement("select");
  for (const [value, label] of [
    ["", "How complicated did you find the survey?"],
    ["1", "1 - very simple"],
    ["2", "2 - fairly easy"],
    ["3", "3 - challenging"],
    ["4", "4 - complicated"],
    ["5", "5 - extremely complicated"],
  ]) {
    const option = document.createElement("option");
    option.value = value!;
    option.textContent = label!;
    difficulty.append(option);
  }
  const gender = document.createElement("input");
  gender.placeholder = "gender (optional)";
  const age = document.createElement("input");
  age.placeholder = "age band (optional)";
  const comments = document.createElement("textarea");
  comments.placeholder = "feedback (optional)";
  const send = el("button", "", "Send and finish");
  const status = el("div", "status", "");
  send.addEventListener("click", () => {
    if (!flow.session) return;
    void api
      .submitFeedback({
        session_id: flow.session.session_id,
        difficulty: difficulty.value ? Number(difficulty.value) : undefined,
        comments: comments.value || undefined,
        gender: gender.value || undefined,
        age_band: age.value || undefined,
      })
      .then(() => {
        status.textContent = "Feedback stored. You can close this page.";
        send.disabled = true;
      })
      .catch((err) => {
        status.textContent = String(err);
      });
  });
  wrap.append(difficulty, gender, age, comments, send, status);
  return wrap;
}

function whatIfPage(api: ApiClient): HTMLElement {
  const page = el("section", "whatif-page");
  const controller = new WhatIfController(api);

  const presetBar = el("div", "preset-bar");
  presetBar.append(el("span", "", "Presets:"));
  for (const name of PRESETS) {
    const button = el("button", "preset", name);
    button.addEventListener("click", () => {
      void controller.loadPreset(name);
    });
    presetBar.append(button);
  }
  const errorBox = el("div", "error-box", "");
  const gridBox = el("div", "grid-box");
  const resultBox = el("div", "result-box", "Loading ...");
  page.append(
    el(
      "p",
      "",
      "Edit confusion-cost exponents (rows: predicted class, columns: " +
        "true class; a cell of 4 means a cost of 10k). Metrics and " +
        "safety consequences below are recomputed by the server after " +
        "each edit; the baseline for comparison is the uniform-cost rule.",
    ),
    presetBar,
    errorBox,
    gridBox,
    resultBox,
  );

  const renderGrid = () => {
    gridBox.replaceChildren(
      matrixGrid(controller.matrix, (row, col, value) => {
        controller.edit(row, col, value);
        renderGrid();
      }),
    );
  };

  controller.onUpdate = () => {
    errorBox.textContent = controller.lastError ?? "";
    const response = controller.latest;
    if (!response) return;
    resultBox.replaceChildren(
      el("h3", "", "Segmentation quality"),
      metricsTable(response.metrics),
      el("h3", "", "Overlooked humans per braking zone"),
      zonesTable(
        response.consequences.zones,
        response.birdseye.rule_names,
      ),
      el("h3", "", "Bird's-eye view"),
      birdseyeSvg(response.birdseye),
      precisionPie(
        response.consequences.precision_whatif,
        "practicability (this matrix)",
      ),
      precisionPie(
        response.consequences.precision_baseline,
        "practicability (uniform costs)",
      ),
    );
    renderGrid();
  };

  void controller.loadPreset("passenger");
  return page;
}

export function mount(): void {
  const root = getRoot();
  const api = new ApiClient();
  const tabs = el("nav", "tabs");
  const surveyTab = el("button", "tab active", "Survey");
  const whatifTab = el("button", "tab", "What-if explorer");
  tabs.append(surveyTab, whatifTab);
  const body = el("main", "tab-body");
  root.append(tabs, body);

  let current: "survey" | "whatif" | null = null;
  const show = (which: "survey" | "whatif") => {
    if (current === which) return;
    current = which;
    surveyTab.classList.toggle("active", which === "survey");
    whatifTab.classList.toggle("active", which === "whatif");
    body.replaceChildren(
      which === "survey" ? surveyPage(api) : whatIfPage(api),
    );
  };
  surveyTab.addEventListener("click", () => show("survey"));
  whatifTab.addEventListener("click", () => show("whatif"));
  show("survey");
}

mount();
