/**
 * HTML builders for every screen. Pure string producers: no DOM
 * access, no state, so the full rendering surface is testable in a
 * plain node process.
 *
 * Numbers are rendered straight from service payloads. In particular
 * the agreement tables print the service's own display strings; the
 * client never formats or recomputes a metric.
 */

import { AgreementReport, Progress, TaskView } from "./api.js";
import { SessionView } from "./session.js";

export const GUIDANCE_HTML =
  "<p>Mark <strong>Yes</strong> when the answer conveys the same meaning " +
  "as the reference, even if it uses different words. For a name, a " +
  "place, or a numeric value, it must identify the same entity or " +
  "quantity the reference does. Otherwise mark <strong>No</strong>.</p>";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function bannerBlock(banner: string | null): string {
  if (banner === null) {
    return "";
  }
  return `<div class="banner" role="alert">${escapeHtml(banner)}</div>`;
}

function progressLine(progress: Progress | null): string {
  if (progress === null) {
    return "";
  }
  return (
    `<div class="progress">Judged <strong>${progress.done}</strong>` +
    ` of <strong>${progress.total}</strong></div>`
  );
}

export function renderIdentify(banner: string | null): string {
  return `
${bannerBlock(banner)}
<section class="identify">
  <h2>Who is annotating?</h2>
  <form id="identify-form">
    <input id="evaluator-input" name="evaluator" placeholder="evaluator id"
           autocomplete="off" autofocus>
    <button type="submit">Start</button>
  </form>
</section>`;
}

export function renderTask(task: TaskView, view: SessionView): string {
  const disabled = view.pending ? " disabled" : "";
  return `
${bannerBlock(view.banner)}
${progressLine(view.progress)}
<section class="task">
  <div class="field">
    <h3>Question</h3>
    <div class="text-panel">${escapeHtml(task.question)}</div>
  </div>
  <div class="field">
    <h3>Reference answer</h3>
    <div class="text-panel">${escapeHtml(task.reference_answer)}</div>
  </div>
  <div class="field">
    <h3>Model answer</h3>
    <div class="text-panel">${escapeHtml(task.candidate_answer)}</div>
  </div>
  <div class="guidance">
    <h3>Does the answer match the reference?</h3>
    ${GUIDANCE_HTML}
  </div>
  <div class="verdict-buttons">
    <button id="verdict-yes" data-verdict="1"${disabled}>Yes <kbd>y</kbd></button>
    <button id="verdict-no" data-verdict="0"${disabled}>No <kbd>n</kbd></button>
  </div>
</section>`;
}

export function renderCompleted(view: SessionView): string {
  return `
${bannerBlock(view.banner)}
<section class="completed">
  <h2>All assigned pairs judged</h2>
  ${progressLine(view.progress)}
  <p>Nothing left in your queue. Thank you.</p>
</section>`;
}

export function renderError(view: SessionView): string {
  return `
${bannerBlock(view.banner)}
<section class="error">
  <h2>Service unreachable</h2>
  <p>Queued verdicts on this device: ${view.queued}</p>
  <button id="retry-button">Retry</button>
</section>`;
}

export function renderSession(view: SessionView): string {
  switch (view.phase) {
    case "identify":
      return renderIdentify(view.banner);
    case "loading":
      return `<section class="loading"><p>Loading…</p></section>`;
    case "task":
      return renderTask(view.task as TaskView, view);
    case "completed":
      return renderCompleted(view);
    case "error":
      return renderError(view);
  }
}

function agreementRows(rows: AgreementReport["partitions"]): string {
  const sections: string[] = [];
  for (const partition of rows) {
    if (!partition.complete) {
      const gaps = partition.missing
        .map(
          (gap) =>
            `<li>${escapeHtml(gap.evaluator_id)}: ` +
            `${gap.remaining} pairs unjudged</li>`,
        )
        .join("");
      sections.push(`
<section class="partition incomplete">
  <h3>${escapeHtml(partition.partition)}</h3>
  <p>Agreement not yet computable; remaining work:</p>
  <ul class="gaps">${gaps}</ul>
</section>`);
      continue;
    }
    const tables = partition.models
      .map((model) => {
        const body = model.rows
          .map(
            (row) => `
      <tr>
        <td>${row.evaluators.map(escapeHtml).join(" / ")}</td>
        <td class="num">${escapeHtml(row.mcc_display)}</td>
        <td class="num">${escapeHtml(row.accuracy_display)}</td>
        <td class="num">${row.n}</td>
      </tr>`,
          )
          .join("");
        return `
  <h4>${escapeHtml(model.candidate_model)}</h4>
  <table class="agreement">
    <thead><tr><th>Evaluators</th><th>MCC</th><th>Accuracy</th><th>n</th></tr></thead>
    <tbody>${body}
    </tbody>
  </table>`;
      })
      .join("");
    sections.push(`
<section class="partition">
  <h3>${escapeHtml(partition.partition)}</h3>${tables}
</section>`);
  }
  return sections.join("");
}

export function renderAgreement(report: AgreementReport): string {
  return `
<section class="dashboard">
  <h2>Inter-annotator agreement</h2>
  <p>Coverage: ${report.coverage} evaluators per partition</p>
  ${agreementRows(report.partitions)}
</section>`;
}
