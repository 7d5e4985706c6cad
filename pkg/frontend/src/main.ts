/**
 * DOM bootstrap: the one module that touches the page. Everything it
 * mounts comes from the pure builders in render.ts, driven by the
 * session machine and the agreement endpoint.
 */

import { ApiClient } from "./api.js";
import { OfflineQueue } from "./queue.js";
import { Session, SessionView } from "./session.js";
import { renderAgreement, renderSession } from "./render.js";

const app = document.getElementById("app") as HTMLElement;
const tabAnnotate = document.getElementById("tab-annotate") as HTMLElement;
const tabAgreement = document.getElementById("tab-agreement") as HTMLElement;

const api = new ApiClient((url, init) => fetch(url, init));
const queue = new OfflineQueue(window.localStorage);

let activeTab: "annotate" | "agreement" = "annotate";
let lastView: SessionView | null = null;

function wireSessionHandlers(view: SessionView): void {
  const form = document.getElementById("identify-form");
  form?.addEventListener("submit", (event) => {
    event.preventDefault();
    const input = document.getElementById(
      "evaluator-input",
    ) as HTMLInputElement | null;
    if (input) {
      void session.start(input.value);
    }
  });
  document.getElementById("verdict-yes")?.addEventListener("click", () => {
    void session.submit(1);
  });
  document.getElementById("verdict-no")?.addEventListener("click", () => {
    void session.submit(0);
  });
  document.getElementById("retry-button")?.addEventListener("click", () => {
    void session.retry();
  });
  if (view.phase === "identify") {
    (document.getElementById("evaluator-input") as HTMLInputElement | null)?.focus();
  }
}

function paint(view: SessionView): void {
  lastView = view;
  if (activeTab !== "annotate") {
    return;
  }
  app.innerHTML = renderSession(view);
  wireSessionHandlers(view);
}

const session = new Session(api, queue, paint);

async function paintAgreement(): Promise<void> {
  app.innerHTML = `<section class="loading"><p>Loading…</p></section>`;
  try {
    const report = await api.agreement();
    if (activeTab === "agreement") {
      app.innerHTML = renderAgreement(report);
    }
  } catch (error) {
    if (activeTab === "agreement") {
      const message = error instanceof Error ? error.message : String(error);
      app.innerHTML = `<div class="banner" role="alert">${message}</div>`;
    }
  }
}

function selectTab(tab: "annotate" | "agreement"): void {
  activeTab = tab;
  tabAnnotate.classList.toggle("active", tab === "annotate");
  tabAgreement.classList.toggle("active", tab === "agreement");
  if (tab === "annotate") {
    paint(lastView ?? session.view());
  } else {
    void paintAgreement();
  }
}

tabAnnotate.addEventListener("click", () => selectTab("annotate"));
tabAgreement.addEventListener("click", () => selectTab("agreement"));

// Keyboard shortcuts mirror the buttons; ignore them while typing.
document.addEventListener("keydown", (event) => {
  if (
    activeTab !== "annotate" ||
    event.target instanceof HTMLInputElement ||
    event.target instanceof HTMLTextAreaElement
  ) {
    return;
  }
  if (event.key === "y" || event.key === "Y") {
    void session.submit(1);
  } else if (event.key === "n" || event.key === "N") {
    void session.submit(0);
  }
});

paint(session.view());
