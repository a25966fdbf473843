import {ApiClient, ApiError} from './api';
import {CanvasState} from './canvas';
import {runWorkflow} from './jobs';
import {PilotPanel} from './pilot';
import type {Catalog} from './types';

/**
 * Minimal DOM binding: Flow Pilot panel on the left, canvas in the middle,
 * Nodes/Gallery sidebar on the right. All logic lives in the headless
 * modules; this file only renders state and forwards events.
 */
export async function mount(root: HTMLElement, baseUrl = ''): Promise<void> {
  const client = new ApiClient(baseUrl);
  const panel = new PilotPanel(client);
  let canvas = new CanvasState();
  let catalog: Catalog;
  try {
    catalog = await client.getCatalog();
  } catch {
    root.innerHTML = '<div class="banner error">service offline</div>';
    return;
  }

  root.innerHTML = `
    <div class="pilot">
      <input class="query" placeholder="Describe the workflow you need" />
      <button class="go">Search</button>
      <div class="cards"></div>
    </div>
    <div class="canvas"></div>
    <div class="sidebar">
      <h3>Nodes</h3><ul class="nodes"></ul>
      <h3>Gallery</h3><div class="gallery"></div>
      <button class="run">Run</button>
      <div class="status"></div>
    </div>`;

  const queryBox = root.querySelector<HTMLInputElement>('.query')!;
  const cardsBox = root.querySelector<HTMLElement>('.cards')!;
  const canvasBox = root.querySelector<HTMLElement>('.canvas')!;
  const statusBox = root.querySelector<HTMLElement>('.status')!;

  const nodesList = root.querySelector<HTMLElement>('.nodes')!;
  for (const spec of catalog.values()) {
    const item = document.createElement('li');
    item.textContent = spec.type;
    item.draggable = true;
    item.addEventListener('dblclick', () => {
      canvas.addNode(`${spec.type}_${canvas.nodeList().length}`, spec.type);
      renderCanvas();
    });
    nodesList.appendChild(item);
  }

  function renderCanvas(): void {
    canvasBox.innerHTML = '';
    for (const node of canvas.nodeList()) {
      const el = document.createElement('div');
      el.className = 'node';
      el.style.left = `${node.x}px`;
      el.style.top = `${node.y}px`;
      el.textContent = `${node.id} (${node.type})`;
      canvasBox.appendChild(el);
    }
    const edges = document.createElement('div');
    edges.className = 'edges';
    edges.textContent = canvas
      .edgeList()
      .map((e) => `${e.from.node}.${e.from.port} -> ${e.to.node}.${e.to.port}`)
      .join('\n');
    canvasBox.appendChild(edges);
  }

  function renderCards(): void {
    cardsBox.innerHTML = '';
    if (panel.status === 'empty' || panel.status === 'error') {
      cardsBox.textContent = panel.message;
      return;
    }
    for (const card of panel.cards) {
      const el = document.createElement('div');
      el.className = 'card';
      el.innerHTML = `<b>${card.rank}. ${card.name}</b> ♥${card.likes}
        <span class="score">${card.final_score.toFixed(2)}</span>
        <p>${card.snippet}</p><button>Deploy</button>`;
      el.querySelector('button')!.addEventListener('click', async () => {
        canvas = await panel.deploy(card.workflow_id);
        renderCanvas();
      });
      cardsBox.appendChild(el);
    }
  }

  async function renderGallery(): Promise<void> {
    const galleryBox = root.querySelector<HTMLElement>('.gallery')!;
    const {gallery} = await client.getGallery();
    galleryBox.innerHTML = gallery.length === 0 ? '<i>nothing generated yet</i>' : '';
    for (const entry of gallery) {
      const link = document.createElement('a');
      link.href = client.artifactUrl(entry.artifact_id);
      link.textContent = entry.artifact_id;
      galleryBox.appendChild(link);
    }
  }

  root.querySelector('.go')!.addEventListener('click', async () => {
    await panel.search(queryBox.value);
    renderCards();
  });

  root.querySelector('.run')!.addEventListener('click', async () => {
    statusBox.textContent = 'submitting';
    try {
      const job = await runWorkflow(client, {workflow: canvas.toDocument()}, {
        onState: (state) => (statusBox.textContent = state),
      });
      statusBox.textContent = job.state === 'done' ? 'done' : `failed: ${job.error}`;
      await renderGallery();
    } catch (error) {
      statusBox.textContent =
        error instanceof ApiError ? `rejected: ${error.message}` : 'service unreachable';
    }
  });

  await renderGallery();
  renderCanvas();
}
