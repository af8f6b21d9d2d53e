/**
 * End-to-end dashboard test against the real review service running on the
 * demo repository (autoELF granted 1..4, stage 5 compiled, reviewed, ready).
 */

import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { spawn, spawnSync, type ChildProcess } from 'node:child_process';
import { mkdtempSync, rmSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { ApiError, ReleaseGateClient } from '../src/api';
import {
  cellLabel,
  formPermissions,
  renderDecisionForms,
  renderEventEcho,
  renderGateError,
  renderHazardLog,
  renderIssueList,
  renderReadinessMatrix,
  renderTraceMatrix,
} from '../src/views';

const PORT = 8917;
const BASE = `http://127.0.0.1:${PORT}`;
const TOKENS = {
  'tok-committee': 'committee-chair',
  'tok-auditor': 'auditor',
  'tok-developer': 'dev-perception',
};

let workdir = '';
let service: ChildProcess | null = null;

async function waitForService(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const response = await fetch(`${BASE}/api/prototypes`);
      if (response.ok) return;
    } catch {
      // not listening yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error('review service did not come up');
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), 'release-gate-dashboard-'));
  const repo = join(workdir, 'repo');
  const init = spawnSync('python3', [
    '-m', 'release_gate.cli', '-C', repo, 'init', '--demo', '--pending-final',
  ], { encoding: 'utf-8' });
  if (init.status !== 0) {
    throw new Error(`demo init failed: ${init.stderr}`);
  }
  const tokensPath = join(workdir, 'tokens.json');
  writeFileSync(tokensPath, JSON.stringify(TOKENS));
  service = spawn('python3', [
    '-m', 'release_gate.cli', '-C', repo, 'serve',
    '--port', String(PORT), '--tokens', tokensPath,
  ], { stdio: 'ignore' });
  await waitForService();
}, 45_000);

afterAll(() => {
  service?.kill();
  if (workdir) rmSync(workdir, { recursive: true, force: true });
});

describe('readiness matrix', () => {
  it('shows autoELF stage 5 as Ready against the fixture service', async () => {
    const client = new ReleaseGateClient(BASE, 'tok-committee');
    const data = await client.getPrototypes();
    const elf = data.prototypes.find((p) => p.name === 'autoELF');
    expect(elf).toBeDefined();
    expect(elf!.granted).toEqual([1, 2, 3, 4]);
    expect(cellLabel(elf!.stages[4])).toBe('Ready');

    const html = renderReadinessMatrix(data.prototypes);
    expect(html).toContain('autoELF');
    expect(html).toContain('data-prototype="PRO-0003" data-stage="5">Ready');
    // blocked cells expose their issue count without client-side recomputation
    const shuttle = data.prototypes.find((p) => p.name === 'autoSHUTTLE')!;
    expect(cellLabel(shuttle.stages[0])).toMatch(/^Blocked\(\d+\)$/);
  });

  it('drills down to the service readiness report', async () => {
    const client = new ReleaseGateClient(BASE, 'tok-committee');
    const report = await client.getReadiness('PRO-0003', 5);
    expect(report.ready).toBe(true);
    expect(renderIssueList(report)).toContain('no outstanding issues');

    const blocked = await client.getReadiness('PRO-0001', 3);
    expect(blocked.ready).toBe(false);
    const html = renderIssueList(blocked);
    expect(html).toContain('MissingReview');
  });
});

describe('hazard log and traceability screens', () => {
  it('renders the RSIL-banded hazard table', async () => {
    const client = new ReleaseGateClient(BASE, '');
    const log = await client.getHazardLog();
    expect(log.total).toBe(4);
    const html = renderHazardLog(log);
    expect(html).toContain('rsil-4');
    expect(html).toContain('very high');
    expect(html).toContain('HZ-0001');
  });

  it('renders complete chains and highlights nothing on the clean fixture', async () => {
    const client = new ReleaseGateClient(BASE, '');
    const trace = await client.getTraceability();
    expect(trace.issues).toEqual([]);
    expect(trace.rows.every((row) => row.complete)).toBe(true);
    const html = renderTraceMatrix(trace);
    expect(html).toContain('All chains are complete.');
    expect(html).not.toContain('class="broken"');
  });
});

describe('decision form role gating', () => {
  it('disables submission for a developer token and names the required role', async () => {
    const client = new ReleaseGateClient(BASE, 'tok-developer');
    const identity = await client.whoami();
    expect(identity.role).toBe('FunctionDeveloper');
    const permissions = formPermissions(identity);
    expect(permissions.decisions).toBe(false);
    const html = renderDecisionForms(identity, (await client.getPrototypes()).prototypes);
    expect(html).toMatch(/decision-form[\s\S]*<button type="submit" disabled>/);
    expect(html).toContain('requires the role ReleaseCommittee');
  });

  it('a developer token cannot submit a decision; the gate error is surfaced verbatim', async () => {
    const client = new ReleaseGateClient(BASE, 'tok-developer');
    let caught: ApiError | null = null;
    try {
      await client.postDecision({ prototype: 'PRO-0003', stage: 5 });
    } catch (error) {
      caught = error as ApiError;
    }
    expect(caught).not.toBeNull();
    expect(caught!.status).toBe(403);
    expect(caught!.message).toContain('requires ReleaseCommittee');
    expect(renderGateError(caught!.message, caught!.report))
      .toContain('requires ReleaseCommittee');
  });

  it('an unknown token is rejected with 401', async () => {
    const client = new ReleaseGateClient(BASE, 'tok-nobody');
    await expect(client.postDecision({ prototype: 'PRO-0003', stage: 5 }))
      .rejects.toMatchObject({ status: 401 });
  });
});

describe('committee decision flow', () => {
  it('posting the stage-5 decision flips the cell to Granted and echoes the event', async () => {
    const client = new ReleaseGateClient(BASE, 'tok-committee');
    const result = await client.postDecision({
      prototype: 'PRO-0003',
      stage: 5,
      conditions: 'public demonstration under the operating instructions',
    });
    expect(result.granted).toEqual([1, 2, 3, 4, 5]);
    expect(result.prototype_state.stages[4].status).toBe('Granted');

    const refreshed = await client.getPrototypes();
    const elf = refreshed.prototypes.find((p) => p.name === 'autoELF')!;
    expect(cellLabel(elf.stages[4])).toBe('Granted');
    expect(renderReadinessMatrix(refreshed.prototypes))
      .toContain('data-prototype="PRO-0003" data-stage="5">Granted');

    const journal = await client.getJournal();
    const last = journal.events[journal.events.length - 1];
    expect(last.kind).toBe('ReleaseDecided');
    const echo = renderEventEcho(last);
    expect(echo).toContain(`Journal event ${last.seq}`);
    expect(echo).toContain('ReleaseDecided');
  });

  it('a premature decision for another prototype is blocked with reasons', async () => {
    const client = new ReleaseGateClient(BASE, 'tok-committee');
    let caught: ApiError | null = null;
    try {
      await client.postDecision({ prototype: 'PRO-0001', stage: 1 });
    } catch (error) {
      caught = error as ApiError;
    }
    expect(caught!.status).toBe(409);
    expect(caught!.report).not.toBeNull();
    expect(renderGateError(caught!.message, caught!.report)).toContain('MissingReview');
  });
});
