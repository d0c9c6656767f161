// Canvas scatter of the 2-D projection with the queried pair highlighted.

export function drawScatter(
  canvas: HTMLCanvasElement,
  background: [number, number][],
  highlighted: [[number, number], [number, number]],
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return; // non-rendering environments (tests) skip drawing

  const points = background.concat(highlighted);
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const [x, y] of points) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const pad = 14;
  const sx = (x: number) => pad + ((x - minX) / spanX) * (canvas.width - 2 * pad);
  const sy = (y: number) => canvas.height - pad - ((y - minY) / spanY) * (canvas.height - 2 * pad);

  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = '#b9c2cc';
  for (const [x, y] of background) {
    ctx.beginPath();
    ctx.arc(sx(x), sy(y), 2.2, 0, 2 * Math.PI);
    ctx.fill();
  }
  const colors = ['#d62828', '#1d6fd6'];
  highlighted.forEach(([x, y], i) => {
    ctx.strokeStyle = colors[i] ?? '#000';
    ctx.lineWidth = 2.5;
    ctx.beginPath();
    ctx.arc(sx(x), sy(y), 7, 0, 2 * Math.PI);
    ctx.stroke();
  });
  const [[x1, y1], [x2, y2]] = highlighted;
  ctx.strokeStyle = '#666';
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(sx(x1), sy(y1));
  ctx.lineTo(sx(x2), sy(y2));
  ctx.stroke();
  ctx.setLineDash([]);
}
