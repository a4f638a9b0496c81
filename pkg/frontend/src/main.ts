import { ApiClient } from './api.js';
import { ElicitationSession } from './session.js';
import { ExplorerPanel } from './panels/explorer.js';
import { RhoSuggestPanel } from './panels/rho.js';
import { WhatIfPanel } from './panels/whatif_panel.js';

const api = new ApiClient('');
const session = new ElicitationSession();

const explorer = new ExplorerPanel(
  document.getElementById('explorer') as HTMLElement, api, session);
const rho = new RhoSuggestPanel(
  document.getElementById('rho-suggest') as HTMLElement, api, session);
const whatIf = new WhatIfPanel(
  document.getElementById('what-if') as HTMLElement, api, session, explorer);

rho.onAdopt = (value) => explorer.setRho(value);
explorer.onPriorChanged = () => whatIf.showPriorOnly();

document.getElementById('export-trail')!.addEventListener('click', () => {
  const blob = new Blob([session.exportTrail()], { type: 'application/json' });
  const link = document.createElement('a');
  link.href = URL.createObjectURL(blob);
  link.download = 'elicitation-trail.json';
  link.click();
  URL.revokeObjectURL(link.href);
});

void api.health().then((h) => {
  document.getElementById('engine-version')!.textContent = `engine ${h.engine_version}`;
});

void explorer.refresh();
