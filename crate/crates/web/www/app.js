import init, { transcode, board_apply, board_regroup, derive, house_cells } from "./pkg/numeracy_web.js";

const $ = (id) => document.getElementById(id);
let board = { loose: 0, tens: 0, hundreds: 0 };
let selected = null;

function showBoard(view) {
  board = view.board;
  $("loose").textContent = "|".repeat(board.loose) || "·";
  $("tens").textContent = "▮".repeat(board.tens) || "·";
  $("hundreds").textContent = "■".repeat(board.hundreds) || "·";
  $("board-value").textContent = `${view.value} (${view.verbal})${view.canonical ? "" : ", not regrouped"}`;
}

function boardResult(text) {
  const view = JSON.parse(text);
  $("board-error").textContent = view.error ?? "";
  if (!view.error) showBoard(view);
}

document.querySelectorAll("[data-move]").forEach((button) => {
  button.addEventListener("click", () => {
    const kind = button.dataset.move;
    const action = kind.endsWith("_loose") ? { kind, count: 1 } : { kind };
    boardResult(board_apply(JSON.stringify(board), JSON.stringify(action)));
  });
});
$("regroup").addEventListener("click", () => boardResult(board_regroup(JSON.stringify(board))));

function runTranscode() {
  const out = JSON.parse(transcode($("transcode-in").value, $("transcode-from").value));
  $("transcode-out").className = out.error ? "error" : "";
  $("transcode-out").textContent = out.error
    ?? `value     ${out.value}\nverbal    ${out.verbal}\nsymbolic  ${out.symbolic}\nanalog    ${out.analog.hundreds} h, ${out.analog.tens} t, ${out.analog.units} u`;
}
$("transcode-in").addEventListener("input", runTranscode);
$("transcode-from").addEventListener("change", runTranscode);

function showDerivation(rows, cols) {
  const out = JSON.parse(derive(rows, cols, $("ghost").checked));
  $("derivation").textContent = out.error ?? `${out.headline}\ncost ${out.cost}\n\n${out.explain}`;
}

function drawHouse() {
  const cells = JSON.parse(house_cells($("ghost").checked));
  const grid = $("house");
  grid.replaceChildren();
  for (const cell of cells) {
    const [rows, cols] = cell.rect;
    const button = document.createElement("button");
    button.textContent = `${rows}×${cols}`;
    button.title = cell.headline ?? "not derivable";
    if (cell.known) button.classList.add("known");
    if (selected && selected[0] === rows && selected[1] === cols) button.classList.add("selected");
    button.addEventListener("click", () => {
      selected = [rows, cols];
      drawHouse();
      showDerivation(rows, cols);
    });
    grid.append(button);
  }
  if (selected) showDerivation(...selected);
}
$("ghost").addEventListener("change", drawHouse);

await init();
showBoard(JSON.parse(board_regroup(JSON.stringify(board))));
runTranscode();
drawHouse();
