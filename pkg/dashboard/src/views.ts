/**
 * Pure view renderers: service JSON in, HTML strings out.
 *
 * Every status shown here mirrors the service projection verbatim, so the
 * dashboard and the CLI can never disagree about readiness.
 */

import type {
  HazardLog,
  Identity,
  JournalEvent,
  PrototypeRow,
  ReadinessReport,
  StageCell,
  Traceability,
  ValidationIssue,
} from './api.js';

const STAGES = [1, 2, 3, 4, 5];

// Verbal scale colors per integrity band (0 = none .. 4 = very high).
const RSIL_BAND_CLASS = ['rsil-0', 'rsil-1', 'rsil-2', 'rsil-3', 'rsil-4'];

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function cellLabel(cell: StageCell): string {
  if (cell.status === 'Blocked') return `Blocked(${cell.blocking})`;
  return cell.status;
}

export function renderReadinessMatrix(rows: PrototypeRow[]): string {
  const header = STAGES.map((s) => `<th>Stage ${s}</th>`).join('');
  const body = rows
    .map((row) => {
      const cells = row.stages
        .map((cell) => {
          const label = cellLabel(cell);
          const cls = `cell ${cell.status.toLowerCase()}`;
          return `<td><button class="${cls}" data-prototype="${cell.prototype}"` +
            ` data-stage="${cell.stage}">${label}</button></td>`;
        })
        .join('');
      return `<tr><th class="proto">${escapeHtml(row.name)}` +
        `<span class="id">${row.prototype}</span></th>${cells}</tr>`;
    })
    .join('');
  return `<table class="matrix readiness-matrix">` +
    `<thead><tr><th>Prototype</th>${header}</tr></thead>` +
    `<tbody>${body}</tbody></table>`;
}

export function renderIssueList(report: ReadinessReport): string {
  const title = `${report.prototype} stage ${report.stage}`;
  if (report.issues.length === 0) {
    return `<div class="drilldown"><h3>${title}</h3>` +
      `<p class="ok">Ready: no outstanding issues.</p></div>`;
  }
  const items = report.issues
    .map((issue) => renderIssue(issue))
    .join('');
  return `<div class="drilldown"><h3>${title}: ${report.blocking_count} ` +
    `blocking issue(s)</h3><ul class="issues">${items}</ul></div>`;
}

function renderIssue(issue: ValidationIssue): string {
  return `<li class="issue ${issue.severity}">` +
    `<span class="category">${issue.category}</span> ` +
    `<span class="subject">${escapeHtml(issue.subject)}</span>: ` +
    `${escapeHtml(issue.message)}</li>`;
}

export function renderHazardLog(log: HazardLog): string {
  const counts = Object.entries(log.rsil_counts)
    .map(([band, count]) => `<span class="${RSIL_BAND_CLASS[Number(band)]}">` +
      `RSIL ${band}: ${count}</span>`)
    .join(' ');
  const rows = log.rows
    .map((row) => {
      const cls = RSIL_BAND_CLASS[row.rsil] ?? 'rsil-0';
      return `<tr class="${cls}"><td>${row.hazard}</td>` +
        `<td>${escapeHtml(row.description)}</td>` +
        `<td class="band">RSIL ${row.rsil}<span class="wording">` +
        `${escapeHtml(row.risk_wording)}</span></td>` +
        `<td>${row.mitigation_status}</td>` +
        `<td>${row.hazardous_scenarios.join(', ')}</td></tr>`;
    })
    .join('');
  const unresolved = log.unresolved.length
    ? `<p class="warn">Not fully mitigated: ${log.unresolved.join(', ')}</p>`
    : '<p class="ok">Every hazard with an integrity requirement is mitigated and tested.</p>';
  return `<div class="hazard-log"><p class="summary">${log.total} hazards ${counts}</p>` +
    `${unresolved}<table class="matrix"><thead><tr><th>Hazard</th><th>Description</th>` +
    `<th>Risk</th><th>Mitigation</th><th>Scenarios</th></tr></thead>` +
    `<tbody>${rows}</tbody></table></div>`;
}

export function renderTraceMatrix(data: Traceability): string {
  const rows = data.rows
    .map((row) => {
      const cls = row.complete ? 'complete' : 'broken';
      const dash = '<span class="missing">&mdash;</span>';
      return `<tr class="${cls}"><td>${row.hazard}</td>` +
        `<td>${row.goal ?? dash}</td><td>${row.fsr ?? dash}</td>` +
        `<td>${row.tsr ?? dash}</td>` +
        `<td>${row.components.map(escapeHtml).join(', ') || dash}</td>` +
        `<td>${row.release_documents.join(', ') || dash}</td></tr>`;
    })
    .join('');
  const issues = data.issues.length
    ? `<ul class="issues">${data.issues.map(renderIssue).join('')}</ul>`
    : '<p class="ok">All chains are complete.</p>';
  return `<div class="trace">${issues}<table class="matrix trace-matrix">` +
    `<thead><tr><th>Hazard</th><th>Safety goal</th><th>FSR</th><th>TSR</th>` +
    `<th>Components</th><th>Release documents</th></tr></thead>` +
    `<tbody>${rows}</tbody></table></div>`;
}

export interface FormPermissions {
  reviews: boolean;
  decisions: boolean;
  requiredForReviews: string;
  requiredForDecisions: string;
}

/** What the token's role may submit; the service remains the enforcer. */
export function formPermissions(identity: Identity | null): FormPermissions {
  return {
    reviews: identity?.role === 'CertificationAgency',
    decisions: identity?.role === 'ReleaseCommittee',
    requiredForReviews: 'CertificationAgency',
    requiredForDecisions: 'ReleaseCommittee',
  };
}

export function renderDecisionForms(identity: Identity | null,
                                    prototypes: PrototypeRow[]): string {
  const permissions = formPermissions(identity);
  const who = identity
    ? `Signed in as <strong>${escapeHtml(identity.actor)}</strong>` +
      ` (${identity.role ?? 'unknown role'})`
    : 'Not signed in: set a session token first.';
  const options = prototypes
    .map((p) => `<option value="${p.prototype}">${escapeHtml(p.name)}</option>`)
    .join('');
  const stageOptions = STAGES.map((s) => `<option value="${s}">${s}</option>`).join('');

  const reviewHint = permissions.reviews
    ? ''
    : `<p class="hint">Submitting reviews requires the role ` +
      `${permissions.requiredForReviews}.</p>`;
  const decisionHint = permissions.decisions
    ? ''
    : `<p class="hint">Submitting decisions requires the role ` +
      `${permissions.requiredForDecisions}.</p>`;

  return `<div class="forms"><p class="identity">${who}</p>
<form id="review-form" class="entry">
  <h3>Review (certification agency)</h3>
  <label>Prototype <select name="prototype">${options}</select></label>
  <label>Stage <select name="stage">${stageOptions}</select></label>
  <label>Recommendation <select name="recommendation">
    <option value="For">For</option><option value="Against">Against</option>
  </select></label>
  <label>Notes <input name="notes" type="text" /></label>
  <button type="submit" ${permissions.reviews ? '' : 'disabled'}>Submit review</button>
  ${reviewHint}
</form>
<form id="decision-form" class="entry">
  <h3>Release decision (committee)</h3>
  <label>Prototype <select name="prototype">${options}</select></label>
  <label>Stage <select name="stage">${stageOptions}</select></label>
  <label>Verdict <select name="verdict">
    <option value="Granted">Granted</option><option value="Rejected">Rejected</option>
  </select></label>
  <label>Conditions <input name="conditions" type="text" /></label>
  <button type="submit" ${permissions.decisions ? '' : 'disabled'}>Submit decision</button>
  ${decisionHint}
</form>
<div id="form-result"></div></div>`;
}

/** Echo of the journal event a successful mutation created. */
export function renderEventEcho(event: JournalEvent): string {
  return `<div class="echo"><strong>Journal event ${event.seq}</strong>: ` +
    `${event.kind} by ${escapeHtml(event.actor)} at ${event.timestamp}` +
    `<code>${escapeHtml(JSON.stringify(event.payload))}</code></div>`;
}

export function renderGateError(message: string, report: ReadinessReport | null): string {
  const issues = report ? renderIssueList(report) : '';
  return `<div class="gate-error"><strong>Rejected by the service:</strong> ` +
    `${escapeHtml(message)}${issues}</div>`;
}
